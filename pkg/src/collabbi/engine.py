"""OLAP query execution over a bound cube, plus the classic navigation
operators (drill down, roll up, slice and dice) as pure query transformations.

A query names measures and dimensions of one cube, conjunctive filters, and
optionally a time dimension with a day/month/year bucket. The result is a
deterministic table: one row per surviving group, dimension columns first
(query order, then the time bucket column), measure columns after. Groups with
no surviving fact rows are absent; there is no zero-fill. Default row order is
ascending over the dimension columns; an explicit orderBy overrides it.

Arithmetic runs on the dataset's internal encodings (cents, days since epoch)
so count/sum/min/max are exact; currency values surface as cents / 100.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import date

import numpy as np

from .cube import BoundCube, ColumnBinding, CubeSchema, bind_cube
from .errors import (
    NotFoundError,
    SchemaError,
    TypeMismatchError,
    UnsupportedOperationError,
    ValidationError,
)
from .ssb import Dataset, date_from_days, days_from_date, parse_iso_date

FILTER_OPERATORS = ("equals", "notEquals", "in", "notIn", "gt", "gte", "lt", "lte", "inDateRange")
_SINGLE_VALUE_OPERATORS = ("equals", "notEquals", "gt", "gte", "lt", "lte")
_ORDERING_OPERATORS = ("gt", "gte", "lt", "lte")
GRANULARITIES = ("day", "month", "year")


@dataclass(frozen=True)
class Filter:
    member: str
    operator: str
    values: tuple

    def __post_init__(self):
        if self.operator not in FILTER_OPERATORS:
            raise ValidationError(f"unknown filter operator {self.operator!r}")
        n = len(self.values)
        if self.operator in _SINGLE_VALUE_OPERATORS and n != 1:
            raise ValidationError(f"operator {self.operator} takes exactly 1 value, got {n}")
        if self.operator in ("in", "notIn") and n < 1:
            raise ValidationError(f"operator {self.operator} needs at least 1 value")
        if self.operator == "inDateRange":
            if n != 2:
                raise ValidationError(f"inDateRange takes exactly 2 dates, got {n}")
            start, end = self.values
            try:
                s, e = parse_iso_date(start), parse_iso_date(end)
            except (ValueError, TypeError):
                raise ValidationError(f"inDateRange values must be ISO dates: {self.values!r}") from None
            if s > e:
                raise ValidationError(f"inDateRange start {start} is after end {end}")


@dataclass(frozen=True)
class TimeDimension:
    member: str
    granularity: str
    date_range: tuple[str, str] | None = None

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ValidationError(f"granularity must be one of {GRANULARITIES}, got {self.granularity!r}")
        if self.date_range is not None:
            Filter(member=self.member, operator="inDateRange", values=tuple(self.date_range))


@dataclass(frozen=True)
class Query:
    cube: str
    measures: tuple[str, ...] = ()
    dimensions: tuple[str, ...] = ()
    filters: tuple[Filter, ...] = ()
    time_dimension: TimeDimension | None = None
    order_by: tuple[tuple[str, str], ...] = ()
    limit: int | None = None

    def __post_init__(self):
        if self.limit is not None and self.limit < 1:
            raise ValidationError(f"limit must be positive, got {self.limit}")
        for col, direction in self.order_by:
            if direction not in ("asc", "desc"):
                raise ValidationError(f"orderBy direction must be asc or desc, got {direction!r}")


@dataclass(frozen=True)
class ResultTable:
    header: tuple[str, ...]
    rows: tuple[tuple, ...]

    def to_dict(self) -> dict:
        return {"header": list(self.header), "rows": [list(r) for r in self.rows]}


def query_from_dict(doc: dict) -> Query:
    """Parse the JSON query document ({cube, measures, dimensions, filters,
    timeDimension, orderBy, limit}); unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise SchemaError("query document must be a JSON object")
    unknown = set(doc) - {"cube", "measures", "dimensions", "filters", "timeDimension", "orderBy", "limit"}
    if unknown:
        raise SchemaError(f"unknown query keys {sorted(unknown)}")
    cube = doc.get("cube")
    if not isinstance(cube, str) or not cube:
        raise SchemaError("query needs a cube name")

    def name_list(key: str) -> tuple[str, ...]:
        raw = doc.get(key, [])
        # a bare string would otherwise iterate into characters
        if not isinstance(raw, (list, tuple)) or not all(isinstance(v, str) for v in raw):
            raise SchemaError(f"{key} must be a list of member names")
        return tuple(raw)

    filters = []
    for f in doc.get("filters", []):
        if not isinstance(f, dict) or set(f) != {"member", "operator", "values"}:
            raise SchemaError(f"filter entries need exactly member/operator/values: {f!r}")
        filters.append(Filter(member=f["member"], operator=f["operator"], values=tuple(f["values"])))

    time_dimension = None
    td = doc.get("timeDimension")
    if td is not None:
        if not isinstance(td, dict) or not set(td) <= {"member", "granularity", "dateRange"}:
            raise SchemaError(f"timeDimension needs member/granularity and optional dateRange: {td!r}")
        date_range = tuple(td["dateRange"]) if td.get("dateRange") is not None else None
        time_dimension = TimeDimension(
            member=td.get("member", ""), granularity=td.get("granularity", ""), date_range=date_range)

    order_by = []
    for entry in doc.get("orderBy", []):
        if not (isinstance(entry, (list, tuple)) and len(entry) == 2):
            raise SchemaError(f"orderBy entries are [column, direction] pairs: {entry!r}")
        order_by.append((entry[0], entry[1]))

    return Query(
        cube=cube,
        measures=name_list("measures"),
        dimensions=name_list("dimensions"),
        filters=tuple(filters),
        time_dimension=time_dimension,
        order_by=tuple(order_by),
        limit=doc.get("limit"),
    )


def query_to_dict(query: Query) -> dict:
    doc: dict = {"cube": query.cube}
    if query.measures:
        doc["measures"] = list(query.measures)
    if query.dimensions:
        doc["dimensions"] = list(query.dimensions)
    if query.filters:
        doc["filters"] = [
            {"member": f.member, "operator": f.operator, "values": list(f.values)}
            for f in query.filters
        ]
    if query.time_dimension is not None:
        td: dict = {"member": query.time_dimension.member, "granularity": query.time_dimension.granularity}
        if query.time_dimension.date_range is not None:
            td["dateRange"] = list(query.time_dimension.date_range)
        doc["timeDimension"] = td
    if query.order_by:
        doc["orderBy"] = [[col, direction] for col, direction in query.order_by]
    if query.limit is not None:
        doc["limit"] = query.limit
    return doc


def canonical_query_json(query: Query) -> str:
    """Stable compact JSON rendering used for snapshots and equality checks."""
    return json.dumps(query_to_dict(query), sort_keys=True, separators=(",", ":"))


def bucket_time(value: date, granularity: str) -> date:
    """Start of the day/month/year bucket containing the date."""
    if granularity == "day":
        return value
    if granularity == "month":
        return value.replace(day=1)
    if granularity == "year":
        return value.replace(month=1, day=1)
    raise ValidationError(f"granularity must be one of {GRANULARITIES}, got {granularity!r}")


def _bucket_days(days: np.ndarray, granularity: str) -> list[int]:
    memo: dict[int, int] = {}
    out = []
    for d in days.tolist():
        b = memo.get(d)
        if b is None:
            b = days_from_date(bucket_time(date_from_days(d), granularity))
            memo[d] = b
        out.append(b)
    return out


def _convert_filter_value(kind: str, column_type: str, value, member: str):
    """Convert one wire literal to the member's internal encoding."""
    if kind == "string":
        if not isinstance(value, str):
            raise TypeMismatchError(f"filter on {member} needs string literals, got {value!r}")
        return value
    if kind == "time":
        if not isinstance(value, str):
            raise TypeMismatchError(f"filter on {member} needs ISO date literals, got {value!r}")
        try:
            return parse_iso_date(value)
        except ValueError:
            raise TypeMismatchError(f"filter on {member}: {value!r} is not an ISO date") from None
    # number
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeMismatchError(f"filter on {member} needs numeric literals, got {value!r}")
    if column_type == "decimal":
        return int(round(value * 100))  # compare at cent precision
    return value


class _Executor:
    def __init__(self, bound: BoundCube):
        self.bound = bound
        self.schema = bound.schema
        self.dataset = bound.dataset
        self.fact = bound.dataset.table(bound.schema.base_table)
        self._aligned: dict[str, np.ndarray] = {}

    def member_values(self, member: str) -> np.ndarray:
        """Fact-aligned internal values for a bound member, joining lazily."""
        cached = self._aligned.get(member)
        if cached is not None:
            return cached
        binding = self.bound.bindings[member]
        if binding.join is None:
            values = self.fact.column(binding.column)
        else:
            dim = self.dataset.table(binding.join.dimension_table)
            pk = dim.column(binding.join.dimension_primary_key).tolist()
            pk_index = {v: i for i, v in enumerate(pk)}
            fk = self.fact.column(binding.join.fact_foreign_key).tolist()
            dim_col = dim.column(binding.column)
            gathered = [dim_col[pk_index[v]] for v in fk]
            values = np.empty(len(gathered), dtype=object)
            values[:] = gathered
            if binding.column_type != "text":
                values = np.array(gathered, dtype=np.int64)
        self._aligned[member] = values
        return values

    def dimension_kind(self, member: str) -> tuple[str, ColumnBinding]:
        dim = self.schema.dimension(member)  # raises NotFoundError
        return dim.kind, self.bound.bindings[member]

    def filter_mask(self, flt: Filter, n: int) -> np.ndarray:
        kind, binding = self.dimension_kind(flt.member)
        arr = self.member_values(flt.member)
        op = flt.operator
        if op == "inDateRange":
            if kind != "time":
                raise TypeMismatchError(f"inDateRange needs a time dimension, {flt.member} is {kind}")
            lo = parse_iso_date(flt.values[0])
            hi = parse_iso_date(flt.values[1])
            return (arr >= lo) & (arr <= hi)
        values = [_convert_filter_value(kind, binding.column_type, v, flt.member) for v in flt.values]
        if op in _ORDERING_OPERATORS:
            if kind == "string":
                raise TypeMismatchError(f"ordering operator {op} is not defined on string dimension {flt.member}")
            v = values[0]
            if op == "gt":
                return arr > v
            if op == "gte":
                return arr >= v
            if op == "lt":
                return arr < v
            return arr <= v
        if op == "equals":
            return np.asarray(arr == values[0], dtype=bool)
        if op == "notEquals":
            return np.asarray(arr != values[0], dtype=bool)
        if arr.dtype == object:
            probe = np.empty(len(values), dtype=object)
            probe[:] = values
        else:
            probe = np.array(values)  # let numpy pick int/float, no truncating cast
        isin = np.isin(arr, probe)
        if op == "in":
            return isin
        return ~isin


def _display_dimension_value(kind: str, column_type: str, raw):
    if kind == "time":
        return date_from_days(int(raw)).isoformat()
    if kind == "number" and column_type == "decimal":
        return int(raw) / 100
    if kind == "number":
        return int(raw)
    return raw


def execute(query: Query, schema: CubeSchema, dataset: Dataset) -> ResultTable:
    """Run the query and return its deterministic result table."""
    if not query.measures and not query.dimensions and query.time_dimension is None:
        raise ValidationError("query selects no measures and no dimensions")
    if query.cube != schema.name:
        raise NotFoundError(f"query targets cube {query.cube!r}, schema is {schema.name!r}")
    bound = bind_cube(schema, dataset)
    ex = _Executor(bound)
    n = ex.fact.nrows

    measures = [schema.measure(m) for m in query.measures]

    dim_info = []  # (member, kind, column_type)
    for name in query.dimensions:
        kind, binding = ex.dimension_kind(name)
        dim_info.append((name, kind, binding.column_type))

    td = query.time_dimension
    if td is not None:
        dim = schema.dimension(td.member)
        if dim.kind != "time":
            raise SchemaError(f"timeDimension member {td.member} has kind {dim.kind}, expected time")

    mask = np.ones(n, dtype=bool)
    for flt in query.filters:
        mask &= ex.filter_mask(flt, n)
    if td is not None and td.date_range is not None:
        mask &= ex.filter_mask(
            Filter(member=td.member, operator="inDateRange", values=tuple(td.date_range)), n)

    idx = np.nonzero(mask)[0].tolist()

    key_columns: list[list] = [ex.member_values(name).tolist() for name, _, _ in dim_info]
    if td is not None:
        key_columns.append(_bucket_days(ex.member_values(td.member), td.granularity))

    measure_columns: list[list | None] = []
    for m in measures:
        if m.kind == "count":
            measure_columns.append(None)
        else:
            measure_columns.append(ex.member_values(m.name).tolist())

    groups: dict[tuple, list[int]] = {}
    for i in idx:
        key = tuple(col[i] for col in key_columns)
        groups.setdefault(key, []).append(i)

    def aggregate(m, column: list | None, rows: list[int]):
        if m.kind == "count":
            return len(rows)
        assert column is not None
        ctype = bound.bindings[m.name].column_type
        vals = [column[i] for i in rows]
        if m.kind == "sum":
            total = sum(vals)
            return total / 100 if ctype == "decimal" else total
        if m.kind == "avg":
            mean = sum(vals) / len(vals)
            return mean / 100 if ctype == "decimal" else mean
        picked = min(vals) if m.kind == "min" else max(vals)
        return picked / 100 if ctype == "decimal" else int(picked)

    out_rows = []
    for key in sorted(groups):
        rows = groups[key]
        display_key = [
            _display_dimension_value(kind, ctype, raw)
            for (name, kind, ctype), raw in zip(dim_info, key)
        ]
        if td is not None:
            display_key.append(date_from_days(int(key[len(dim_info)])).isoformat())
        cells = [aggregate(m, col, rows) for m, col in zip(measures, measure_columns)]
        out_rows.append(tuple(display_key + cells))

    header = list(query.dimensions)
    if td is not None:
        header.append(f"{td.member}.{td.granularity}")
    header += list(query.measures)

    if query.order_by:
        positions = {name: i for i, name in enumerate(header)}
        for col, direction in reversed(query.order_by):
            if col not in positions:
                raise NotFoundError(f"orderBy column {col!r} not in result header")
            p = positions[col]
            out_rows.sort(key=lambda r: r[p], reverse=(direction == "desc"))

    if query.limit is not None:
        out_rows = out_rows[: query.limit]

    return ResultTable(header=tuple(header), rows=tuple(out_rows))


def drill_down(query: Query, schema: CubeSchema, measure: str) -> Query:
    """Append the measure's drill members to the query's dimensions
    (deduplicated, order preserved)."""
    m = schema.measure(measure)  # raises NotFoundError
    if not m.drill_members:
        raise UnsupportedOperationError(f"measure {measure} declares no drill members")
    dims = list(query.dimensions)
    for member in m.drill_members:
        if member not in dims:
            dims.append(member)
    return replace(query, dimensions=tuple(dims))


def roll_up(query: Query) -> Query:
    """Remove the last dimension; with none left, coarsen the time bucket
    day -> month -> year. At the fully rolled-up state this is the identity."""
    if query.dimensions:
        return replace(query, dimensions=query.dimensions[:-1])
    td = query.time_dimension
    if td is not None and td.granularity != "year":
        coarser = "month" if td.granularity == "day" else "year"
        return replace(query, time_dimension=replace(td, granularity=coarser))
    return query


def slice_dice(query: Query, filters: list[Filter], schema: CubeSchema | None = None) -> Query:
    """Conjoin filters onto the query. A new `in` filter on a member replaces
    an existing `in` filter on that member (re-dicing)."""
    if schema is not None:
        for f in filters:
            schema.dimension(f.member)  # raises NotFoundError
    current = list(query.filters)
    for f in filters:
        if f.operator == "in":
            for i, existing in enumerate(current):
                if existing.member == f.member and existing.operator == "in":
                    current[i] = f
                    break
            else:
                current.append(f)
        else:
            current.append(f)
    return replace(query, filters=tuple(current))
