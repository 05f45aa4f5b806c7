"""Cube document parsing, validation diagnostics, and round-trips."""

import json

import pytest

from collabbi.cube import (
    cube_to_dict,
    default_cube_document,
    parse_cube,
    parse_cube_dict,
    serialize_cube,
    validate_cube,
    validation_errors,
)
from collabbi.errors import ParseError, SchemaError


def test_lineorder_cube_shape(lineorder_cube):
    assert lineorder_cube.name == "Lineorder"
    assert len(lineorder_cube.measures) == 5
    assert len(lineorder_cube.dimensions) == 9

    kinds = {m.name: m.kind for m in lineorder_cube.measures}
    assert kinds == {
        "count": "count",
        "loOrdtotalprice": "sum",
        "loExtendedprice": "sum",
        "loQuantity": "sum",
        "loRevenue": "sum",
    }
    assert lineorder_cube.measure("loOrdtotalprice").format == "currency"
    assert lineorder_cube.measure("count").drill_members == (
        "loOrderdate", "loCommitdate", "loOrderpriority", "loShipmode")
    assert lineorder_cube.measure("loRevenue").drill_members == ("loOrderdate", "loCommitdate")

    dim_kinds = {d.name: d.kind for d in lineorder_cube.dimensions}
    assert dim_kinds == {
        "loLinenumber": "string",
        "loOrderdate": "time",
        "loCommitdate": "time",
        "loOrderpriority": "string",
        "loShipmode": "string",
        "loShippriority": "string",
        "loDiscount": "number",
        "loSupplycost": "number",
        "loTax": "number",
    }


def test_member_order_preserved(lineorder_cube):
    assert [m.name for m in lineorder_cube.measures] == [
        "count", "loOrdtotalprice", "loExtendedprice", "loQuantity", "loRevenue"]
    assert [d.name for d in lineorder_cube.dimensions][:3] == [
        "loLinenumber", "loOrderdate", "loCommitdate"]


def test_lineorder_cube_validates_cleanly(lineorder_cube, dataset):
    assert validation_errors(validate_cube(lineorder_cube, dataset)) == []


def test_serialize_parse_roundtrip(lineorder_cube):
    text = serialize_cube(lineorder_cube)
    assert parse_cube(text) == lineorder_cube


def test_roundtrip_preserves_document():
    doc = json.loads(default_cube_document())
    assert cube_to_dict(parse_cube_dict(doc)) == doc


def _doc(**overrides):
    base = {
        "name": "Mini",
        "baseTable": "lineorder",
        "measures": {"count": {"type": "count"}},
        "dimensions": {"loShipmode": {"type": "string", "column": "lo_shipmode"}},
    }
    base.update(overrides)
    return base


def test_empty_cube_rejected():
    with pytest.raises(SchemaError, match="empty cube"):
        parse_cube_dict(_doc(measures={}, dimensions={}))


def test_unknown_top_level_key_rejected():
    with pytest.raises(SchemaError, match="preAggregations"):
        parse_cube_dict(_doc(preAggregations=[]))


def test_unknown_member_key_rejected():
    with pytest.raises(SchemaError, match="sql"):
        parse_cube_dict(_doc(measures={"count": {"type": "count", "sql": "COUNT(*)"}}))


def test_count_with_column_rejected():
    with pytest.raises(SchemaError, match="count takes no column"):
        parse_cube_dict(_doc(measures={"count": {"type": "count", "column": "lo_tax"}}))


def test_sum_without_column_rejected():
    with pytest.raises(SchemaError, match="requires a column"):
        parse_cube_dict(_doc(measures={"total": {"type": "sum"}}))


def test_duplicate_member_name_rejected():
    doc = _doc(
        measures={"loShipmode": {"type": "count"}},
        dimensions={"loShipmode": {"type": "string", "column": "lo_shipmode"}},
    )
    with pytest.raises(SchemaError, match="loShipmode"):
        parse_cube_dict(doc)


def test_drill_member_must_be_declared_dimension():
    doc = _doc(measures={"count": {"type": "count", "drillMembers": ["loGhost"]}})
    with pytest.raises(SchemaError, match="loGhost"):
        parse_cube_dict(doc)


def test_syntax_error_carries_location():
    with pytest.raises(ParseError, match="line"):
        parse_cube('{"name": "x", }')


def test_validation_flags_missing_column(dataset):
    doc = _doc(dimensions={"ghost": {"type": "string", "column": "lo_ghost"}})
    report = validate_cube(parse_cube_dict(doc), dataset)
    errors = validation_errors(report)
    assert len(errors) == 1
    assert "lo_ghost" in errors[0].message
    assert errors[0].member == "ghost"


def test_validation_flags_type_mismatch(dataset):
    doc = _doc(measures={"modes": {"type": "sum", "column": "lo_shipmode"}})
    report = validate_cube(parse_cube_dict(doc), dataset)
    errors = validation_errors(report)
    assert len(errors) == 1
    assert "lo_shipmode" in errors[0].message


def test_validation_flags_missing_base_table(dataset):
    doc = _doc(baseTable="warehouse")
    errors = validation_errors(validate_cube(parse_cube_dict(doc), dataset))
    assert any("warehouse" in e.message for e in errors)


def test_joined_cube_validates(dataset):
    doc = _doc(
        joins=[{"dimensionTable": "customer", "factForeignKey": "lo_custkey",
                "dimensionPrimaryKey": "c_custkey"}],
        dimensions={
            "loShipmode": {"type": "string", "column": "lo_shipmode"},
            "custNation": {"type": "string", "column": "c_nation"},
        },
    )
    assert validation_errors(validate_cube(parse_cube_dict(doc), dataset)) == []


def test_unused_join_is_a_warning_not_error(dataset):
    doc = _doc(joins=[{"dimensionTable": "customer", "factForeignKey": "lo_custkey",
                       "dimensionPrimaryKey": "c_custkey"}])
    report = validate_cube(parse_cube_dict(doc), dataset)
    assert validation_errors(report) == []
    assert any(d.severity == "warning" for d in report)
