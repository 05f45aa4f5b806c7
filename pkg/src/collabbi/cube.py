"""Cube definitions: the declarative JSON skeleton binding measures and
dimensions to dataset columns.

Document format (`*.cube.json`): a pure-data JSON object with top-level keys

    name        identifier of the cube
    baseTable   fact table the cube is rooted at
    joins       optional list of {dimensionTable, factForeignKey, dimensionPrimaryKey}
    measures    map member name -> {type, column?, format?, drillMembers?}
    dimensions  map member name -> {type, column}
    dataSource  optional, only "default" is honored

Unknown keys, at the top level or inside members, are rejected. Member order
is preserved as written. Measures of kind "count" take no column; sum/avg/
min/max require a numeric column. Dimension kinds: string (text column),
time (date column), number (integer or decimal column).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import NotFoundError, ParseError, SchemaError
from .ssb import Dataset

MEASURE_KINDS = ("count", "sum", "avg", "min", "max")
DIMENSION_KINDS = ("string", "time", "number")
FORMATS = ("none", "currency")

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

_DIMENSION_COLUMN_TYPES = {"string": ("text",), "time": ("date",), "number": ("integer", "decimal")}
_NUMERIC_TYPES = ("integer", "decimal")


@dataclass(frozen=True)
class Measure:
    name: str
    kind: str
    source_column: str | None = None
    format: str = "none"
    drill_members: tuple[str, ...] = ()


@dataclass(frozen=True)
class Dimension:
    name: str
    kind: str
    source_column: str = ""


@dataclass(frozen=True)
class Join:
    dimension_table: str
    fact_foreign_key: str
    dimension_primary_key: str


@dataclass(frozen=True)
class CubeSchema:
    name: str
    base_table: str
    joins: tuple[Join, ...] = ()
    measures: tuple[Measure, ...] = ()
    dimensions: tuple[Dimension, ...] = ()
    data_source: str = "default"

    def measure(self, name: str) -> Measure:
        for m in self.measures:
            if m.name == name:
                return m
        raise NotFoundError(f"no measure {name!r} in cube {self.name}")

    def dimension(self, name: str) -> Dimension:
        for d in self.dimensions:
            if d.name == name:
                return d
        raise NotFoundError(f"no dimension {name!r} in cube {self.name}")

    def has_measure(self, name: str) -> bool:
        return any(m.name == name for m in self.measures)

    def has_dimension(self, name: str) -> bool:
        return any(d.name == name for d in self.dimensions)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    member: str
    message: str


def _require_ident(value, context: str) -> str:
    if not isinstance(value, str) or not _IDENT_RE.match(value):
        raise SchemaError(f"{context}: not a valid identifier: {value!r}")
    return value


def _parse_measure(name: str, body: dict, dimension_names: set[str]) -> Measure:
    if not isinstance(body, dict):
        raise SchemaError(f"measure {name}: expected an object")
    unknown = set(body) - {"type", "column", "format", "drillMembers"}
    if unknown:
        raise SchemaError(f"measure {name}: unknown keys {sorted(unknown)}")
    kind = body.get("type")
    if kind not in MEASURE_KINDS:
        raise SchemaError(f"measure {name}: type must be one of {MEASURE_KINDS}, got {kind!r}")
    column = body.get("column")
    if kind == "count":
        if column is not None:
            raise SchemaError(f"measure {name}: count takes no column")
    else:
        if column is None:
            raise SchemaError(f"measure {name}: kind {kind} requires a column")
        _require_ident(column, f"measure {name} column")
    fmt = body.get("format", "none")
    if fmt not in FORMATS:
        raise SchemaError(f"measure {name}: format must be one of {FORMATS}, got {fmt!r}")
    drill = body.get("drillMembers", [])
    if not isinstance(drill, list) or not all(isinstance(d, str) for d in drill):
        raise SchemaError(f"measure {name}: drillMembers must be a list of identifiers")
    for d in drill:
        if d not in dimension_names:
            raise SchemaError(f"measure {name}: drill member {d!r} is not a declared dimension")
    return Measure(name=name, kind=kind, source_column=column, format=fmt, drill_members=tuple(drill))


def _parse_dimension(name: str, body: dict) -> Dimension:
    if not isinstance(body, dict):
        raise SchemaError(f"dimension {name}: expected an object")
    unknown = set(body) - {"type", "column"}
    if unknown:
        raise SchemaError(f"dimension {name}: unknown keys {sorted(unknown)}")
    kind = body.get("type")
    if kind not in DIMENSION_KINDS:
        raise SchemaError(f"dimension {name}: type must be one of {DIMENSION_KINDS}, got {kind!r}")
    column = body.get("column")
    if column is None:
        raise SchemaError(f"dimension {name}: a column binding is required")
    _require_ident(column, f"dimension {name} column")
    return Dimension(name=name, kind=kind, source_column=column)


def parse_cube_dict(doc: dict) -> CubeSchema:
    if not isinstance(doc, dict):
        raise SchemaError("cube document must be a JSON object")
    unknown = set(doc) - {"name", "baseTable", "joins", "measures", "dimensions", "dataSource"}
    if unknown:
        raise SchemaError(f"unknown top-level keys {sorted(unknown)}")
    name = _require_ident(doc.get("name"), "cube name")
    base_table = _require_ident(doc.get("baseTable"), "baseTable")

    joins = []
    for j in doc.get("joins", []):
        if not isinstance(j, dict) or set(j) != {"dimensionTable", "factForeignKey", "dimensionPrimaryKey"}:
            raise SchemaError(f"join entries need exactly dimensionTable/factForeignKey/dimensionPrimaryKey: {j!r}")
        joins.append(Join(
            dimension_table=_require_ident(j["dimensionTable"], "join dimensionTable"),
            fact_foreign_key=_require_ident(j["factForeignKey"], "join factForeignKey"),
            dimension_primary_key=_require_ident(j["dimensionPrimaryKey"], "join dimensionPrimaryKey"),
        ))

    measures_doc = doc.get("measures", {})
    dimensions_doc = doc.get("dimensions", {})
    if not isinstance(measures_doc, dict) or not isinstance(dimensions_doc, dict):
        raise SchemaError("measures and dimensions must be maps from member name to definition")
    if not measures_doc and not dimensions_doc:
        raise SchemaError("empty cube: at least one measure or dimension is required")

    dimension_names = set()
    for dname in dimensions_doc:
        _require_ident(dname, "dimension name")
        dimension_names.add(dname)

    members_seen: set[str] = set()
    dimensions = []
    for dname, body in dimensions_doc.items():
        if dname in members_seen:
            raise SchemaError(f"duplicate member name {dname}")
        members_seen.add(dname)
        dimensions.append(_parse_dimension(dname, body))

    measures = []
    for mname, body in measures_doc.items():
        _require_ident(mname, "measure name")
        if mname in members_seen:
            raise SchemaError(f"duplicate member name {mname}")
        members_seen.add(mname)
        measures.append(_parse_measure(mname, body, dimension_names))

    data_source = doc.get("dataSource", "default")
    if not isinstance(data_source, str):
        raise SchemaError("dataSource must be a string")

    return CubeSchema(
        name=name,
        base_table=base_table,
        joins=tuple(joins),
        measures=tuple(measures),
        dimensions=tuple(dimensions),
        data_source=data_source,
    )


def default_cube_document() -> str:
    """JSON text of the built-in Lineorder cube definition."""
    from importlib import resources

    return resources.files("collabbi").joinpath("data/lineorder.cube.json").read_text()


def parse_cube(document: str) -> CubeSchema:
    """Parse a cube document from JSON text."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from None
    return parse_cube_dict(doc)


def cube_to_dict(schema: CubeSchema) -> dict:
    doc: dict = {"name": schema.name, "baseTable": schema.base_table}
    if schema.joins:
        doc["joins"] = [
            {
                "dimensionTable": j.dimension_table,
                "factForeignKey": j.fact_foreign_key,
                "dimensionPrimaryKey": j.dimension_primary_key,
            }
            for j in schema.joins
        ]
    measures = {}
    for m in schema.measures:
        body: dict = {"type": m.kind}
        if m.source_column is not None:
            body["column"] = m.source_column
        if m.format != "none":
            body["format"] = m.format
        if m.drill_members:
            body["drillMembers"] = list(m.drill_members)
        measures[m.name] = body
    doc["measures"] = measures
    doc["dimensions"] = {
        d.name: {"type": d.kind, "column": d.source_column} for d in schema.dimensions
    }
    doc["dataSource"] = schema.data_source
    return doc


def serialize_cube(schema: CubeSchema) -> str:
    return json.dumps(cube_to_dict(schema), indent=2) + "\n"


@dataclass(frozen=True)
class ColumnBinding:
    table: str
    column: str
    column_type: str
    join: Join | None = None  # None when the column lives in the base table


@dataclass(frozen=True)
class BoundCube:
    """A cube schema resolved against a concrete dataset."""

    schema: CubeSchema
    dataset: Dataset
    bindings: dict[str, ColumnBinding] = field(default_factory=dict)


def _resolve(schema: CubeSchema, dataset: Dataset) -> tuple[dict[str, ColumnBinding], list[Diagnostic]]:
    diagnostics: list[Diagnostic] = []
    bindings: dict[str, ColumnBinding] = {}

    if schema.base_table not in dataset.tables:
        diagnostics.append(Diagnostic("error", "", f"base table {schema.base_table!r} not in dataset"))
        return bindings, diagnostics
    base = dataset.table(schema.base_table)

    # column name -> (table, join) over base table plus joined tables
    scope: dict[str, tuple[str, Join | None]] = {}
    for cname, _ in base.schema.columns:
        scope[cname] = (schema.base_table, None)
    usable_joins = []
    for join in schema.joins:
        if join.dimension_table not in dataset.tables:
            diagnostics.append(Diagnostic("error", "", f"joined table {join.dimension_table!r} not in dataset"))
            continue
        dim = dataset.table(join.dimension_table)
        ok = True
        if not base.schema.has_column(join.fact_foreign_key):
            diagnostics.append(Diagnostic(
                "error", "", f"join key {join.fact_foreign_key!r} missing from {schema.base_table}"))
            ok = False
        if not dim.schema.has_column(join.dimension_primary_key):
            diagnostics.append(Diagnostic(
                "error", "", f"join key {join.dimension_primary_key!r} missing from {join.dimension_table}"))
            ok = False
        if not ok:
            continue
        usable_joins.append(join)
        for cname, _ in dim.schema.columns:
            if cname in scope:
                diagnostics.append(Diagnostic(
                    "error", "", f"ambiguous column {cname!r}: in {scope[cname][0]} and {join.dimension_table}"))
            else:
                scope[cname] = (join.dimension_table, join)

    def bind(member: str, column: str, allowed: tuple[str, ...], want: str) -> None:
        if column not in scope:
            diagnostics.append(Diagnostic("error", member, f"column {column!r} not found"))
            return
        table, join = scope[column]
        ctype = dataset.table(table).schema.column_type(column)
        if ctype not in allowed:
            diagnostics.append(Diagnostic(
                "error", member,
                f"column {column} has type {ctype}, but {want} requires one of {allowed}"))
            return
        bindings[member] = ColumnBinding(table=table, column=column, column_type=ctype, join=join)

    for m in schema.measures:
        if m.kind == "count":
            continue
        assert m.source_column is not None
        bind(m.name, m.source_column, _NUMERIC_TYPES, f"{m.kind} measure")
    for d in schema.dimensions:
        bind(d.name, d.source_column, _DIMENSION_COLUMN_TYPES[d.kind], f"{d.kind} dimension")

    bound_tables = {b.table for b in bindings.values()}
    for join in usable_joins:
        if join.dimension_table not in bound_tables:
            diagnostics.append(Diagnostic(
                "warning", "", f"join to {join.dimension_table} is declared but no member uses it"))

    return bindings, diagnostics


def validate_cube(schema: CubeSchema, dataset: Dataset) -> list[Diagnostic]:
    """Check every member binding against the dataset; returns diagnostics,
    never raises. An empty error list means the cube is executable."""
    _, diagnostics = _resolve(schema, dataset)
    return diagnostics


def validation_errors(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.severity == "error"]


def bind_cube(schema: CubeSchema, dataset: Dataset) -> BoundCube:
    """Resolve the cube against a dataset, raising on any error diagnostic."""
    bindings, diagnostics = _resolve(schema, dataset)
    errors = validation_errors(diagnostics)
    if errors:
        details = "; ".join(f"{d.member or '<cube>'}: {d.message}" for d in errors)
        raise SchemaError(f"cube {schema.name} does not validate: {details}")
    return BoundCube(schema=schema, dataset=dataset, bindings=bindings)
