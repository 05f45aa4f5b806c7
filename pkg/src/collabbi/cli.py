"""Command line entry points.

    collabbi generate --data-dir VAR [--seed N --fact-rows N ...]
    collabbi serve [--config FILE --data-dir VAR --listen HOST:PORT --token T]
    collabbi query --file QUERY.json [--data-dir VAR]
    collabbi export --out FILE [--data-dir VAR]

Exit codes: 0 success, 1 usage error, 2 execution error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import ServiceConfig, load_config
from .engine import ResultTable
from .errors import CollabBIError
from .platform import CollabPlatform, save_dataset
from .ssb import GeneratorConfig, generate_dataset


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="collabbi", description="Collaborative BI service")
    sub = parser.add_subparsers(dest="command", metavar="command")
    defaults = GeneratorConfig()

    gen = sub.add_parser("generate", help="write a deterministic dataset to a directory")
    gen.add_argument("--data-dir", required=True)
    gen.add_argument("--seed", type=int, default=defaults.seed)
    gen.add_argument("--fact-rows", type=int, default=defaults.fact_rows)
    gen.add_argument("--customers", type=int, default=defaults.customers)
    gen.add_argument("--suppliers", type=int, default=defaults.suppliers)
    gen.add_argument("--parts", type=int, default=defaults.parts)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", help="key/value config file")
    serve.add_argument("--data-dir")
    serve.add_argument("--listen", help="host:port")
    serve.add_argument("--token", help="shared bearer token")

    query = sub.add_parser("query", help="execute a query document and print the table")
    query.add_argument("--file", required=True, help="query document (JSON)")
    query.add_argument("--data-dir")
    query.add_argument("--json", action="store_true", help="print the raw ResultTable JSON")

    export = sub.add_parser("export", help="write the dashboard export document")
    export.add_argument("--out", required=True, help="output path, or - for stdout")
    export.add_argument("--data-dir")
    return parser


def _effective_config(args) -> ServiceConfig:
    config = load_config(getattr(args, "config", None))
    overrides = {}
    if getattr(args, "data_dir", None):
        overrides["data_dir"] = args.data_dir
    if getattr(args, "listen", None):
        overrides["listen_address"] = args.listen
    if getattr(args, "token", None):
        overrides["shared_token"] = args.token
    return dataclasses.replace(config, **overrides) if overrides else config


def format_table(result: ResultTable) -> str:
    header = [str(h) for h in result.header]
    rows = [[str(v) for v in row] for row in result.rows]
    widths = [
        max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]
    lines = [
        " | ".join(h.ljust(w) for h, w in zip(header, widths)),
        "-+-".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append(" | ".join(v.ljust(w) for v, w in zip(row, widths)))
    lines.append(f"({len(rows)} rows)")
    return "\n".join(lines)


def _cmd_generate(args) -> int:
    directory = Path(args.data_dir)
    directory.mkdir(parents=True, exist_ok=True)
    dataset = generate_dataset(seed=args.seed, fact_rows=args.fact_rows,
                               customers=args.customers, suppliers=args.suppliers,
                               parts=args.parts)
    for path in save_dataset(dataset, directory):
        table = dataset.table(path.stem)
        print(f"wrote {path} ({table.nrows} rows)")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import build_platform, create_app

    config = _effective_config(args)
    platform = build_platform(config)
    app = create_app(platform, config)
    print(f"serving on http://{config.listen_address} (data in {config.data_dir})")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def _cmd_query(args) -> int:
    config = _effective_config(args)
    with open(args.file, encoding="utf-8") as handle:
        doc = json.load(handle)
    platform = CollabPlatform(config.data_dir, generator=config.generator)
    result = platform.run_query(doc)
    if args.json:
        print(json.dumps(result.to_dict(), indent=2))
    else:
        print(format_table(result))
    return 0


def _cmd_export(args) -> int:
    config = _effective_config(args)
    platform = CollabPlatform(config.data_dir, generator=config.generator)
    payload = json.dumps(platform.export_document(), indent=2) + "\n"
    if args.out == "-":
        sys.stdout.write(payload)
    else:
        Path(args.out).write_text(payload, encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "serve": _cmd_serve,
    "query": _cmd_query,
    "export": _cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except json.JSONDecodeError as exc:
        print(f"collabbi {args.command}: invalid JSON: {exc}", file=sys.stderr)
        return 2
    except (CollabBIError, OSError) as exc:
        print(f"collabbi {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
