"""
Dashboard, export and import
============================

Saved queries become dashboard items with a chart type; charts impose
shape constraints on the query. The whole dashboard, comment threads
included, exports to a single JSON document that imports losslessly
elsewhere.
"""

import json
import tempfile

from collabbi.annotations import DashboardItemTarget
from collabbi.dashboard import render_query_text
from collabbi.engine import query_from_dict
from collabbi.errors import ChartConstraintError
from collabbi.platform import CollabPlatform
from collabbi.sessions import UserProfile, VirtualLocation
from collabbi.ssb import GeneratorConfig

platform = CollabPlatform(tempfile.mkdtemp(prefix="cbi-demo-"),
                          generator=GeneratorConfig(fact_rows=500))

PIE = {"cube": "Lineorder", "measures": ["count"], "dimensions": ["loShipmode"]}
BAR = {"cube": "Lineorder", "measures": ["count"],
       "dimensions": ["loOrderpriority"]}

pie_item = platform.add_dashboard_item(query_from_dict(PIE), "pie",
                                       "Orders by ship mode")
bar_item = platform.add_dashboard_item(query_from_dict(BAR), "bar",
                                       "Orders by priority",
                                       description="watch the URGENT share")
print("items:", [(i.position, i.title) for i in platform.list_dashboard_items()])

# the stored query renders to a stable text form
print()
print(render_query_text(pie_item.query))

# a pie chart takes exactly one measure and one dimension
try:
    platform.add_dashboard_item(
        query_from_dict({"cube": "Lineorder", "measures": ["count"],
                         "dimensions": ["loShipmode", "loOrderpriority"]}),
        "pie", "too wide for a pie")
except ChartConstraintError as err:
    print("\nrejected:", err)

# a comment thread on the bar chart travels with the export
session = platform.open_session(
    [UserProfile(display_name="Jean", mbox="jean@example.org")],
    VirtualLocation("review"))
platform.add_annotation(session.session_id, session.participants[0],
                        DashboardItemTarget(bar_item.item_id),
                        "comment", "URGENT share is shrinking")

document = platform.export_document()
print("\nexport:", document["formatVersion"], "-",
      len(document["items"]), "items,",
      sum(len(i["comments"]) for i in document["items"]), "comment")

# importing into a second, empty platform reproduces queries and threads
other = CollabPlatform(tempfile.mkdtemp(prefix="cbi-demo-"),
                       generator=GeneratorConfig(fact_rows=500))
new_ids = other.import_document(document)
assert len(new_ids) == len(document["items"])

again = other.export_document()
assert again["items"] == document["items"]
print("import then re-export is item-for-item identical")

# both platforms compute the same numbers for the imported queries
for item in other.list_dashboard_items():
    mine = platform.run_query_object(item.query).rows
    theirs = other.run_query_object(item.query).rows
    assert mine == theirs
print("imported queries execute to the same tables")

print()
print(json.dumps(document["items"][1]["comments"], indent=2))
