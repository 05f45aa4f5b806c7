"""
Navigating a query: drill down, roll up, slice and dice
=======================================================

The three operations are pure functions from query to query, so an
analysis session is a chain of small steps that can be replayed.
"""

from collabbi.cube import default_cube_document, parse_cube
from collabbi.engine import (
    Filter,
    drill_down,
    execute,
    query_from_dict,
    roll_up,
    slice_dice,
)
from collabbi.ssb import generate_dataset

dataset = generate_dataset(seed=42, fact_rows=10_000)
cube = parse_cube(default_cube_document())


def show(label, query):
    result = execute(query, cube, dataset)
    print(f"{label}: dims={list(query.dimensions)} "
          f"filters={[(f.member, f.operator, list(f.values)) for f in query.filters]} "
          f"-> {len(result.rows)} rows")
    return result


# start from the grand total
query = query_from_dict({"cube": "Lineorder", "measures": ["count"]})
show("start", query)

# drill down on count: its drill members become grouping dimensions
drilled = drill_down(query, cube, "count")
show("drill", drilled)
assert list(drilled.dimensions) == ["loOrderdate", "loCommitdate",
                                    "loOrderpriority", "loShipmode"]

# slice: narrow to two ship modes
sliced = slice_dice(drilled, [Filter("loShipmode", "in", ("TRUCK", "AIR"))])
show("slice", sliced)

# dice: a second `in` filter on the same member replaces the first,
# so widening back out is legal
diced = slice_dice(sliced, [Filter("loShipmode", "in", ("TRUCK", "AIR", "SHIP"))])
show("dice", diced)
assert len(diced.filters) == 1

# roll up drops the innermost dimension each time
rolled = roll_up(diced)
show("roll", rolled)
assert list(rolled.dimensions) == ["loOrderdate", "loCommitdate", "loOrderpriority"]

# rolling up with no dimensions left is the identity
empty = query_from_dict({"cube": "Lineorder", "measures": ["count"]})
assert roll_up(empty) == empty
print("roll_up at the top is a no-op")

# filters only ever narrow: row totals never grow along a slice chain
base_total = sum(r[-1] for r in execute(drilled, cube, dataset).rows)
narrowed_total = sum(r[-1] for r in execute(sliced, cube, dataset).rows)
assert narrowed_total <= base_total
print(f"slice kept {narrowed_total} of {base_total} orders")
