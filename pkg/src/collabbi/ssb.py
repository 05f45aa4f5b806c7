"""SSB-style in-memory dataset: LINEORDER fact table plus CUSTOMER, SUPPLIER,
PART and DWDATE dimension tables, stored column-major.

Internal value encodings (exactness first):
    integer -> int64
    decimal -> int64, in cents (sums stay exact)
    date    -> int64, days since 1970-01-01
    text    -> Python str (numpy object array)

Datasets are immutable after construction: every column array is marked
non-writeable and tables are frozen dataclasses. Any number of readers may
share one dataset concurrently.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import IO, Iterable

import numpy as np

from .errors import (
    DomainError,
    IntegrityError,
    NotFoundError,
    ParseError,
    ValidationError,
)
from .rng import SplitMix64

COLUMN_TYPES = ("integer", "decimal", "text", "date")

_EPOCH_ORDINAL = date(1970, 1, 1).toordinal()

# Generated order dates span the classic SSB range.
DATE_RANGE_START = date(1992, 1, 1)
DATE_RANGE_END = date(1998, 8, 2)

SHIPMODE_DOMAIN = ("AIR", "SHIP", "MAIL", "FOB", "TRUCK", "RIG AIR", "RAIL")
ORDERPRIORITY_DOMAIN = ("URGENT", "HIGH", "MEDIUM", "NOT SPECIFIED", "LOW")

_DECIMAL_RE = re.compile(r"^[+-]?\d+(\.\d{1,2})?$")
_ISO_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def days_from_date(d: date) -> int:
    return d.toordinal() - _EPOCH_ORDINAL


def date_from_days(days: int) -> date:
    return date.fromordinal(int(days) + _EPOCH_ORDINAL)


def parse_decimal_cents(text: str) -> int:
    """Parse a decimal literal with at most two fraction digits into cents."""
    m = _DECIMAL_RE.match(text)
    if not m:
        raise ValueError(f"not a decimal with <= 2 fraction digits: {text!r}")
    sign = -1 if text.lstrip().startswith("-") else 1
    body = text.lstrip("+-")
    if "." in body:
        whole, frac = body.split(".")
        frac = frac.ljust(2, "0")
    else:
        whole, frac = body, "00"
    return sign * (int(whole) * 100 + int(frac))


def format_cents(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    cents = abs(int(cents))
    return f"{sign}{cents // 100}.{cents % 100:02d}"


def parse_iso_date(text: str) -> int:
    """Strict YYYY-MM-DD -> days since epoch."""
    if not _ISO_DATE_RE.match(text):
        raise ValueError(f"not an ISO date (YYYY-MM-DD): {text!r}")
    return days_from_date(date.fromisoformat(text))


@dataclass(frozen=True)
class TableSchema:
    """Declarative table layout: ordered typed columns, optional primary key,
    optional closed value domains, and foreign keys into dimension tables."""

    name: str
    columns: tuple[tuple[str, str], ...]
    primary_key: str | None = None
    domains: dict[str, frozenset[str]] = field(default_factory=dict)
    foreign_keys: tuple[tuple[str, str, str], ...] = ()  # (column, ref table, ref column)

    def __post_init__(self):
        names = [c for c, _ in self.columns]
        if len(names) != len(set(names)):
            raise ValidationError(f"duplicate column names in table {self.name}")
        for _, ctype in self.columns:
            if ctype not in COLUMN_TYPES:
                raise ValidationError(f"unknown column type {ctype!r} in {self.name}")

    def column_type(self, name: str) -> str:
        for cname, ctype in self.columns:
            if cname == name:
                return ctype
        raise NotFoundError(f"no column {name!r} in table {self.name}")

    def has_column(self, name: str) -> bool:
        return any(cname == name for cname, _ in self.columns)


LINEORDER_SCHEMA = TableSchema(
    name="lineorder",
    columns=(
        ("lo_linenumber", "text"),
        ("lo_custkey", "integer"),
        ("lo_partkey", "integer"),
        ("lo_suppkey", "integer"),
        ("lo_orderdate", "date"),
        ("lo_orderpriority", "text"),
        ("lo_shippriority", "text"),
        ("lo_quantity", "integer"),
        ("lo_extendedprice", "decimal"),
        ("lo_ordtotalprice", "decimal"),
        ("lo_discount", "integer"),
        ("lo_revenue", "decimal"),
        ("lo_supplycost", "decimal"),
        ("lo_tax", "integer"),
        ("lo_commitdate", "date"),
        ("lo_shipmode", "text"),
    ),
    domains={
        "lo_shipmode": frozenset(SHIPMODE_DOMAIN),
        "lo_orderpriority": frozenset(ORDERPRIORITY_DOMAIN),
    },
    foreign_keys=(
        ("lo_custkey", "customer", "c_custkey"),
        ("lo_suppkey", "supplier", "s_suppkey"),
        ("lo_partkey", "part", "p_partkey"),
    ),
)

CUSTOMER_SCHEMA = TableSchema(
    name="customer",
    columns=(
        ("c_custkey", "integer"),
        ("c_name", "text"),
        ("c_city", "text"),
        ("c_nation", "text"),
        ("c_region", "text"),
        ("c_mktsegment", "text"),
    ),
    primary_key="c_custkey",
)

SUPPLIER_SCHEMA = TableSchema(
    name="supplier",
    columns=(
        ("s_suppkey", "integer"),
        ("s_name", "text"),
        ("s_city", "text"),
        ("s_nation", "text"),
        ("s_region", "text"),
    ),
    primary_key="s_suppkey",
)

PART_SCHEMA = TableSchema(
    name="part",
    columns=(
        ("p_partkey", "integer"),
        ("p_name", "text"),
        ("p_mfgr", "text"),
        ("p_category", "text"),
        ("p_brand1", "text"),
        ("p_color", "text"),
        ("p_size", "integer"),
    ),
    primary_key="p_partkey",
)

DWDATE_SCHEMA = TableSchema(
    name="dwdate",
    columns=(
        ("d_datekey", "date"),
        ("d_date", "text"),
        ("d_dayofweek", "text"),
        ("d_month", "text"),
        ("d_year", "integer"),
        ("d_yearmonthnum", "integer"),
        ("d_daynuminmonth", "integer"),
    ),
    primary_key="d_datekey",
)

SCHEMAS: dict[str, TableSchema] = {
    s.name: s
    for s in (LINEORDER_SCHEMA, CUSTOMER_SCHEMA, SUPPLIER_SCHEMA, PART_SCHEMA, DWDATE_SCHEMA)
}


def _freeze_column(ctype: str, values: list) -> np.ndarray:
    if ctype == "text":
        arr = np.empty(len(values), dtype=object)
        arr[:] = values
    else:
        arr = np.array(values, dtype=np.int64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Table:
    """Immutable columnar table: schema plus one numpy array per column."""

    schema: TableSchema
    columns: dict[str, np.ndarray]
    nrows: int

    @classmethod
    def from_columns(cls, schema: TableSchema, columns: dict[str, list]) -> "Table":
        lengths = {len(v) for v in columns.values()}
        if len(lengths) > 1:
            raise ValidationError(f"ragged columns in table {schema.name}: {sorted(lengths)}")
        nrows = lengths.pop() if lengths else 0
        frozen = {}
        for cname, ctype in schema.columns:
            if cname not in columns:
                raise ValidationError(f"missing column {cname!r} for table {schema.name}")
            frozen[cname] = _freeze_column(ctype, columns[cname])
        if schema.primary_key is not None:
            pk = frozen[schema.primary_key]
            if len(set(pk.tolist())) != nrows:
                raise IntegrityError(f"duplicate primary key in {schema.name}.{schema.primary_key}")
        for col, domain in schema.domains.items():
            for v in frozen[col]:
                if v not in domain:
                    raise DomainError(col, v)
        return cls(schema=schema, columns=frozen, nrows=nrows)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise NotFoundError(f"no column {name!r} in table {self.schema.name}") from None


@dataclass(frozen=True)
class Dataset:
    """Immutable set of tables. When LINEORDER is present its foreign keys are
    checked against the dimension primary keys at construction time."""

    tables: dict[str, Table]

    @classmethod
    def from_tables(cls, tables: Iterable[Table]) -> "Dataset":
        by_name = {t.schema.name: t for t in tables}
        for t in by_name.values():
            for col, ref_table, ref_col in t.schema.foreign_keys:
                if ref_table not in by_name:
                    raise IntegrityError(
                        f"{t.schema.name}.{col} references missing table {ref_table}"
                    )
                ref_values = set(by_name[ref_table].column(ref_col).tolist())
                for v in t.column(col).tolist():
                    if v not in ref_values:
                        raise IntegrityError(
                            f"{t.schema.name}.{col} value {v} has no match in {ref_table}.{ref_col}"
                        )
        return cls(tables=by_name)

    def table(self, name: str) -> Table:
        try:
            return self.tables[name]
        except KeyError:
            raise NotFoundError(f"no table named {name!r}") from None


def column_view(dataset: Dataset, table: str, column: str) -> np.ndarray:
    """Read-only view over one stored column (no copy)."""
    return dataset.table(table).column(column)


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 42
    fact_rows: int = 10_000
    customers: int = 200
    suppliers: int = 50
    parts: int = 300


_REGIONS = ("AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST")
_NATIONS = (
    ("ALGERIA", "AFRICA"), ("ARGENTINA", "AMERICA"), ("BRAZIL", "AMERICA"),
    ("CANADA", "AMERICA"), ("EGYPT", "MIDDLE EAST"), ("ETHIOPIA", "AFRICA"),
    ("FRANCE", "EUROPE"), ("GERMANY", "EUROPE"), ("INDIA", "ASIA"),
    ("INDONESIA", "ASIA"), ("IRAN", "MIDDLE EAST"), ("IRAQ", "MIDDLE EAST"),
    ("JAPAN", "ASIA"), ("JORDAN", "MIDDLE EAST"), ("KENYA", "AFRICA"),
    ("MOROCCO", "AFRICA"), ("MOZAMBIQUE", "AFRICA"), ("PERU", "AMERICA"),
    ("CHINA", "ASIA"), ("ROMANIA", "EUROPE"), ("SAUDI ARABIA", "MIDDLE EAST"),
    ("VIETNAM", "ASIA"), ("RUSSIA", "EUROPE"), ("UNITED KINGDOM", "EUROPE"),
    ("UNITED STATES", "AMERICA"),
)
_MKTSEGMENTS = ("AUTOMOBILE", "BUILDING", "FURNITURE", "MACHINERY", "HOUSEHOLD")
_COLORS = (
    "almond", "antique", "aquamarine", "azure", "beige", "bisque", "black",
    "blanched", "blue", "blush", "brown", "burlywood", "burnished", "chartreuse",
    "chiffon", "chocolate", "coral", "cornflower", "cornsilk", "cream", "cyan",
    "dark", "deep", "dim", "dodger", "drab", "firebrick", "floral", "forest",
    "frosted", "gainsboro", "ghost",
)
_PART_TYPES = (
    "STANDARD TIN", "STANDARD NICKEL", "SMALL BRASS", "SMALL STEEL",
    "MEDIUM COPPER", "MEDIUM TIN", "LARGE NICKEL", "LARGE BRASS",
    "ECONOMY STEEL", "PROMO COPPER",
)
_WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")
_MONTHS = (
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
)


def _gen_customer(rng: SplitMix64, n: int) -> Table:
    cols: dict[str, list] = {c: [] for c, _ in CUSTOMER_SCHEMA.columns}
    for i in range(1, n + 1):
        nation, region = _NATIONS[rng.randint(0, len(_NATIONS) - 1)]
        city = f"{nation[:9]}{rng.randint(0, 9)}"
        cols["c_custkey"].append(i)
        cols["c_name"].append(f"Customer#{i:09d}")
        cols["c_city"].append(city)
        cols["c_nation"].append(nation)
        cols["c_region"].append(region)
        cols["c_mktsegment"].append(rng.choice(_MKTSEGMENTS))
    return Table.from_columns(CUSTOMER_SCHEMA, cols)


def _gen_supplier(rng: SplitMix64, n: int) -> Table:
    cols: dict[str, list] = {c: [] for c, _ in SUPPLIER_SCHEMA.columns}
    for i in range(1, n + 1):
        nation, region = _NATIONS[rng.randint(0, len(_NATIONS) - 1)]
        cols["s_suppkey"].append(i)
        cols["s_name"].append(f"Supplier#{i:09d}")
        cols["s_city"].append(f"{nation[:9]}{rng.randint(0, 9)}")
        cols["s_nation"].append(nation)
        cols["s_region"].append(region)
    return Table.from_columns(SUPPLIER_SCHEMA, cols)


def _gen_part(rng: SplitMix64, n: int) -> Table:
    cols: dict[str, list] = {c: [] for c, _ in PART_SCHEMA.columns}
    for i in range(1, n + 1):
        mfgr = f"MFGR#{rng.randint(1, 5)}"
        category = f"{mfgr}{rng.randint(1, 5)}"
        color = rng.choice(_COLORS)
        cols["p_partkey"].append(i)
        cols["p_name"].append(f"{color} {rng.choice(_PART_TYPES).lower()}")
        cols["p_mfgr"].append(mfgr)
        cols["p_category"].append(category)
        cols["p_brand1"].append(f"{category}{rng.randint(1, 40)}")
        cols["p_color"].append(color)
        cols["p_size"].append(rng.randint(1, 50))
    return Table.from_columns(PART_SCHEMA, cols)


def _gen_dwdate() -> Table:
    """One row per calendar day of the generation date range (no randomness)."""
    cols: dict[str, list] = {c: [] for c, _ in DWDATE_SCHEMA.columns}
    d = DATE_RANGE_START
    while d <= DATE_RANGE_END:
        cols["d_datekey"].append(days_from_date(d))
        cols["d_date"].append(d.isoformat())
        cols["d_dayofweek"].append(_WEEKDAYS[d.weekday()])
        cols["d_month"].append(_MONTHS[d.month - 1])
        cols["d_year"].append(d.year)
        cols["d_yearmonthnum"].append(d.year * 100 + d.month)
        cols["d_daynuminmonth"].append(d.day)
        d += timedelta(days=1)
    return Table.from_columns(DWDATE_SCHEMA, cols)


def _gen_lineorder(rng: SplitMix64, config: GeneratorConfig) -> Table:
    cols: dict[str, list] = {c: [] for c, _ in LINEORDER_SCHEMA.columns}
    day_lo = days_from_date(DATE_RANGE_START)
    day_hi = days_from_date(DATE_RANGE_END)
    for _ in range(config.fact_rows):
        orderdate = rng.randint(day_lo, day_hi)
        quantity = rng.randint(1, 50)
        extended = rng.randint(100_00, 55_000_00)
        discount = rng.randint(0, 10)
        # revenue = extendedprice * (100 - discount) / 100, rounded half up on cents
        revenue = (extended * (100 - discount) + 50) // 100
        cols["lo_linenumber"].append(str(rng.randint(1, 7)))
        cols["lo_custkey"].append(rng.randint(1, config.customers))
        cols["lo_partkey"].append(rng.randint(1, config.parts))
        cols["lo_suppkey"].append(rng.randint(1, config.suppliers))
        cols["lo_orderdate"].append(orderdate)
        cols["lo_orderpriority"].append(rng.choice(ORDERPRIORITY_DOMAIN))
        cols["lo_shippriority"].append("0")
        cols["lo_quantity"].append(quantity)
        cols["lo_extendedprice"].append(extended)
        cols["lo_ordtotalprice"].append(rng.randint(extended, extended * 4))
        cols["lo_discount"].append(discount)
        cols["lo_revenue"].append(revenue)
        cols["lo_supplycost"].append(rng.randint(100_00, 10_000_00))
        cols["lo_tax"].append(rng.randint(0, 8))
        cols["lo_commitdate"].append(orderdate + rng.randint(30, 90))
        cols["lo_shipmode"].append(rng.choice(SHIPMODE_DOMAIN))
    return Table.from_columns(LINEORDER_SCHEMA, cols)


def generate_dataset(
    seed: int = 42,
    fact_rows: int = 10_000,
    customers: int = 200,
    suppliers: int = 50,
    parts: int = 300,
) -> Dataset:
    """Deterministically generate the five-table dataset.

    Same seed and sizes yield identical datasets, column by column. Tables are
    generated in a fixed order (customer, supplier, part, dwdate, lineorder)
    from one splitmix64 stream.
    """
    for label, n in (("fact_rows", fact_rows), ("customers", customers),
                     ("suppliers", suppliers), ("parts", parts)):
        if n < 1:
            raise ValidationError(f"{label} must be >= 1, got {n}")
    rng = SplitMix64(seed)
    tables = [
        _gen_customer(rng, customers),
        _gen_supplier(rng, suppliers),
        _gen_part(rng, parts),
        _gen_dwdate(),
        _gen_lineorder(rng, GeneratorConfig(seed, fact_rows, customers, suppliers, parts)),
    ]
    return Dataset.from_tables(tables)


def _parse_cell(ctype: str, raw: str, column: str, line_no: int):
    try:
        if ctype == "integer":
            return int(raw)
        if ctype == "decimal":
            return parse_decimal_cents(raw)
        if ctype == "date":
            return parse_iso_date(raw)
        return raw
    except ValueError:
        raise ParseError(f"cannot parse {raw!r} as {ctype} for column {column}", line=line_no) from None


def load_csv(schema: TableSchema, source: str | IO[str], delimiter: str = "|") -> Table:
    """Load one header-less delimited file into a Table.

    A single trailing delimiter per line is tolerated (dbgen-style dumps end
    every row with one). Dates must be ISO YYYY-MM-DD. Rows violating a closed
    column domain, the column count, or primary-key uniqueness are rejected
    with the 1-based line number.
    """
    if len(delimiter) != 1:
        raise ValidationError(f"delimiter must be a single character, got {delimiter!r}")
    stream = io.StringIO(source) if isinstance(source, str) else source
    ncols = len(schema.columns)
    cols: dict[str, list] = {c: [] for c, _ in schema.columns}
    seen_pk: set = set()
    line_no = 0
    for line in stream:
        line_no += 1
        line = line.rstrip("\n").rstrip("\r")
        if not line:
            continue
        fields = line.split(delimiter)
        if len(fields) == ncols + 1 and fields[-1] == "":
            fields.pop()
        if len(fields) != ncols:
            raise ParseError(
                f"expected {ncols} fields for table {schema.name}, got {len(fields)}",
                line=line_no,
            )
        for (cname, ctype), raw in zip(schema.columns, fields):
            value = _parse_cell(ctype, raw, cname, line_no)
            domain = schema.domains.get(cname)
            if domain is not None and value not in domain:
                raise DomainError(cname, value, line=line_no)
            cols[cname].append(value)
        if schema.primary_key is not None:
            pk_val = cols[schema.primary_key][-1]
            if pk_val in seen_pk:
                raise IntegrityError(
                    f"duplicate primary key {pk_val!r} in {schema.name}.{schema.primary_key} "
                    f"(line {line_no})"
                )
            seen_pk.add(pk_val)
    return Table.from_columns(schema, cols)


def format_cell(ctype: str, value) -> str:
    if ctype == "decimal":
        return format_cents(int(value))
    if ctype == "date":
        return date_from_days(int(value)).isoformat()
    return str(value)


def write_csv(table: Table, stream: IO[str], delimiter: str = "|") -> None:
    """Inverse of load_csv: deterministic header-less delimited text."""
    types = [ctype for _, ctype in table.schema.columns]
    names = [cname for cname, _ in table.schema.columns]
    for i in range(table.nrows):
        row = [format_cell(t, table.columns[n][i]) for n, t in zip(names, types)]
        stream.write(delimiter.join(row) + "\n")
