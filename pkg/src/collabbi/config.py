"""Service configuration.

Sources, lowest priority first: built-in defaults, an optional flat
key/value config file, then the CBI_DATA_DIR / CBI_LISTEN / CBI_TOKEN
environment variables. The file format is one `key = value` per line with
`#` comments; string values may be double-quoted.

Recognized keys:

    listen = "127.0.0.1:8765"
    data_dir = "var/cbi"
    token = "sekrit"
    generator.seed = 42
    generator.fact_rows = 10000
    generator.customers = 200
    generator.suppliers = 50
    generator.parts = 300
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import ParseError, ValidationError
from .ssb import GeneratorConfig

DEFAULT_LISTEN = "127.0.0.1:8765"
DEFAULT_DATA_DIR = "data"

_GENERATOR_KEYS = {
    "generator.seed": "seed",
    "generator.fact_rows": "fact_rows",
    "generator.customers": "customers",
    "generator.suppliers": "suppliers",
    "generator.parts": "parts",
}
_STRING_KEYS = {"listen", "data_dir", "token"}


def split_listen_address(value: str) -> tuple[str, int]:
    if not isinstance(value, str) or ":" not in value:
        raise ValidationError(f"listen address must be host:port, got {value!r}")
    host, _, port_text = value.rpartition(":")
    if not host:
        raise ValidationError(f"listen address must be host:port, got {value!r}")
    try:
        port = int(port_text)
    except ValueError:
        raise ValidationError(f"listen port must be an integer, got {port_text!r}") from None
    if not 1 <= port <= 65535:
        raise ValidationError(f"listen port out of range: {port}")
    return host, port


@dataclass(frozen=True)
class ServiceConfig:
    listen_address: str = DEFAULT_LISTEN
    data_dir: str = DEFAULT_DATA_DIR
    shared_token: str | None = None
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)

    def __post_init__(self):
        split_listen_address(self.listen_address)
        if self.shared_token is not None and not self.shared_token:
            raise ValidationError("token must be non-empty when set")

    @property
    def host(self) -> str:
        return split_listen_address(self.listen_address)[0]

    @property
    def port(self) -> int:
        return split_listen_address(self.listen_address)[1]


def parse_config_text(text: str) -> dict:
    """Parse the flat key/value format into a plain dict; integer values
    for generator keys, strings otherwise."""
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected `key = value`, got {line!r}", line_no)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _STRING_KEYS and key not in _GENERATOR_KEYS:
            raise ParseError(f"unknown config key {key!r}", line_no)
        if key in values:
            raise ParseError(f"duplicate config key {key!r}", line_no)
        if value.startswith('"'):
            if len(value) < 2 or not value.endswith('"'):
                raise ParseError(f"unterminated quoted value for {key}", line_no)
            value = value[1:-1]
        if key in _GENERATOR_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ParseError(f"{key} takes an integer, got {value!r}", line_no) from None
        else:
            if not value:
                raise ParseError(f"{key} needs a value", line_no)
            values[key] = value
    return values


def load_config(path: str | os.PathLike | None = None,
                env: Mapping[str, str] | None = None) -> ServiceConfig:
    """Assemble the effective configuration. `path` names an optional
    config file (an error if given but missing); env vars win over it."""
    env = os.environ if env is None else env
    values: dict[str, object] = {}
    if path is not None:
        file_path = Path(path)
        if not file_path.exists():
            raise ValidationError(f"config file not found: {file_path}")
        values = parse_config_text(file_path.read_text(encoding="utf-8"))

    listen = env.get("CBI_LISTEN") or values.get("listen") or DEFAULT_LISTEN
    data_dir = env.get("CBI_DATA_DIR") or values.get("data_dir") or DEFAULT_DATA_DIR
    token = env.get("CBI_TOKEN") or values.get("token")
    defaults = GeneratorConfig()
    generator = GeneratorConfig(
        seed=values.get("generator.seed", defaults.seed),
        fact_rows=values.get("generator.fact_rows", defaults.fact_rows),
        customers=values.get("generator.customers", defaults.customers),
        suppliers=values.get("generator.suppliers", defaults.suppliers),
        parts=values.get("generator.parts", defaults.parts),
    )
    return ServiceConfig(listen_address=str(listen), data_dir=str(data_dir),
                         shared_token=token, generator=generator)
