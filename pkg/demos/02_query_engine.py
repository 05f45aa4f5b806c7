"""
Running analytical queries
==========================

A cube maps member names onto the star schema; a query document picks
measures, dimensions, filters and an optional time bucket. Results come
back as a deterministic table.
"""

import json

from collabbi.cube import default_cube_document, parse_cube
from collabbi.engine import execute, query_from_dict
from collabbi.ssb import generate_dataset

dataset = generate_dataset(seed=42, fact_rows=10_000)
cube = parse_cube(default_cube_document())

print(f"cube {cube.name}: {len(cube.measures)} measures, "
      f"{len(cube.dimensions)} dimensions")


def run(doc):
    result = execute(query_from_dict(doc), cube, dataset)
    print()
    print(json.dumps(doc))
    print("  " + " | ".join(str(h) for h in result.header))
    for row in result.rows:
        print("  " + " | ".join(str(v) for v in row))
    return result


# order counts per ship mode, all seven modes present
by_mode = run({"cube": "Lineorder",
               "measures": ["count"],
               "dimensions": ["loShipmode"]})
assert len(by_mode.rows) == 7
assert sum(r[-1] for r in by_mode.rows) == 10_000

# revenue is summed in integer cents and shown in currency units,
# so it agrees exactly with a direct column sum
revenue = run({"cube": "Lineorder", "measures": ["loRevenue"]})
cents = int(dataset.table("lineorder").columns["lo_revenue"].sum())
assert revenue.rows[0][-1] == cents / 100

# filters conjoin; `in` keeps any of the listed values
run({"cube": "Lineorder",
     "measures": ["count"],
     "dimensions": ["loOrderpriority"],
     "filters": [{"member": "loShipmode",
                  "operator": "in",
                  "values": ["TRUCK", "AIR"]}]})

# a time dimension buckets rows by year within the date range
run({"cube": "Lineorder",
     "measures": ["count", "loRevenue"],
     "timeDimension": {"member": "loOrderdate",
                       "granularity": "year",
                       "dateRange": ["1993-01-01", "1995-12-31"]},
     "limit": 3})
