"""
The HTTP service
================

Every capability is reachable over JSON routes under /api. This walks
the surface in-process with a test client; `collabbi serve` runs the
same app on a real socket.
"""

import json
import tempfile

from fastapi.testclient import TestClient

from collabbi.api import create_app
from collabbi.config import ServiceConfig
from collabbi.platform import CollabPlatform
from collabbi.ssb import GeneratorConfig

platform = CollabPlatform(tempfile.mkdtemp(prefix="cbi-demo-"),
                          generator=GeneratorConfig(fact_rows=500))
client = TestClient(create_app(platform, ServiceConfig(shared_token="demo")),
                    raise_server_exceptions=False)
auth = {"Authorization": "Bearer demo"}

# health stays open without the token; everything else is gated
print("no token ->", client.get("/api/dashboard").status_code)
print("health   ->", client.get("/api/health").json())

# run a query
result = client.post("/api/query", headers=auth, json={
    "cube": "Lineorder", "measures": ["count"],
    "dimensions": ["loShipmode"]}).json()
print("\nquery header:", result["header"])
print("first row   :", result["rows"][0])

# open a session, attach a comment, list it back
session = client.post("/api/sessions", headers=auth, json={
    "participants": [{"displayName": "Jean", "mbox": "jean@example.org"}],
    "location": {"kind": "virtual", "label": "standup"}}).json()
target = {"kind": "cube", "cube": "Lineorder"}
client.post("/api/annotations", headers=auth, json={
    "sessionId": session["sessionId"],
    "author": session["participants"][0]["personId"],
    "target": target, "kind": "comment", "body": "looks seasonal"})
listing = client.get("/api/annotations", headers=auth,
                     params={"target": json.dumps(target)}).json()
print("\nannotations:", [(a["kind"], a["body"]) for a in listing["annotations"]])

# dashboard item plus export with a download filename
client.post("/api/dashboard", headers=auth, json={
    "query": {"cube": "Lineorder", "measures": ["count"],
              "dimensions": ["loShipmode"]},
    "chartType": "pie", "title": "Ship modes"})
export = client.get("/api/export", headers=auth)
print("\nexport filename:", export.headers["content-disposition"])
print("export items   :", len(export.json()["items"]))

# errors carry one status per failure class
for label, response in [
    ("unknown cube ", client.get("/api/meta/cubes/Nope/members", headers=auth)),
    ("bad chart    ", client.post("/api/dashboard", headers=auth, json={
        "query": {"cube": "Lineorder", "measures": ["count"],
                  "dimensions": ["loShipmode", "loOrderpriority"]},
        "chartType": "pie", "title": "no"})),
    ("double close ", None),
]:
    if response is None:
        client.post(f"/api/sessions/{session['sessionId']}/close", headers=auth)
        response = client.post(f"/api/sessions/{session['sessionId']}/close",
                               headers=auth)
    print(f"{label} -> {response.status_code} {response.json()['error']}")
