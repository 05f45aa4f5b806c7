"""The assembled platform: data directory lifecycle, restart recovery,
comment bookkeeping, and the export/import round trip."""

import json
import shutil

import pytest

from collabbi.annotations import CubeTarget, DashboardItemTarget, QueryTarget
from collabbi.dashboard import load_dashboard
from collabbi.engine import query_from_dict
from collabbi.errors import NotFoundError, ParseError, ValidationError
from collabbi.kb import IRI, load_kb
from collabbi.platform import (
    CollabPlatform,
    load_dataset,
    target_from_json,
    target_to_json,
)
from collabbi.sessions import VirtualLocation
from conftest import JEAN, KIM, SMALL_GEN, FakeClock, load_query_fixture

SMALL = SMALL_GEN

PIE_DOC = load_query_fixture("fig5_pie")
BAR_DOC = load_query_fixture("fig5_bar")
CROSSTAB_DOC = load_query_fixture("fig6")


@pytest.fixture
def data_dir(small_data_dir):
    return small_data_dir


@pytest.fixture
def plat(data_dir):
    return CollabPlatform(data_dir, clock=FakeClock())


def test_fresh_directory_generates_and_persists(tmp_path):
    first = CollabPlatform(tmp_path / "var", generator=SMALL)
    files = sorted(p.name for p in (tmp_path / "var").glob("*.tbl"))
    assert files == ["customer.tbl", "dwdate.tbl", "lineorder.tbl",
                     "part.tbl", "supplier.tbl"]
    second = CollabPlatform(tmp_path / "var", generator=SMALL)
    a = first.dataset.table("lineorder").column("lo_revenue")
    b = second.dataset.table("lineorder").column("lo_revenue")
    assert a.tolist() == b.tolist()


def test_partial_dataset_is_an_error(data_dir):
    (data_dir / "part.tbl").unlink()
    with pytest.raises(ValidationError) as err:
        load_dataset(data_dir)
    assert "part" in str(err.value)


def test_default_cube_registered(plat):
    assert sorted(plat.cubes) == ["Lineorder"]
    docs = plat.cube_documents()
    assert docs[0]["name"] == "Lineorder"
    members = plat.cube_members("Lineorder")
    assert {m["name"] for m in members["measures"]} >= {"count", "loRevenue"}
    assert {d["name"] for d in members["dimensions"]} >= {"loShipmode", "loOrderpriority"}
    with pytest.raises(NotFoundError):
        plat.cube_members("Ghost")


def test_run_query_on_fixture_documents(plat):
    pie = plat.run_query(PIE_DOC)
    assert pie.header == ("loShipmode", "count")
    assert sum(row[1] for row in pie.rows) == SMALL.fact_rows
    with pytest.raises(NotFoundError):
        plat.run_query({"cube": "Ghost", "measures": ["count"]})


def test_corrupt_kb_fails_startup_with_line_number(data_dir):
    lines = [f"<urn:cbi:person:{i}> <urn:cbi:upo#name> \"P{i}\" ." for i in range(1, 7)]
    lines.append("this is not a triple")
    (data_dir / "cbiont.nt").write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as err:
        CollabPlatform(data_dir, clock=FakeClock())
    assert "line 7" in str(err.value)


def test_state_survives_restart(data_dir):
    plat = CollabPlatform(data_dir, clock=FakeClock())
    info = plat.open_session([JEAN, KIM], VirtualLocation("Data Summit booth"))
    jean = plat.sessions.find_person(JEAN.mbox)
    item = plat.add_dashboard_item(query_from_dict(PIE_DOC), "pie", "Shipping modes")
    note = plat.add_annotation(info.session_id, jean, DashboardItemTarget(item.item_id),
                               "comment", "TRUCK leads")

    again = CollabPlatform(data_dir, clock=FakeClock())
    assert len(again.dashboard) == 1
    restored = again.get_dashboard_item(item.item_id)
    assert restored.title == "Shipping modes"
    assert restored.comment_refs == (note.annotation_id,)
    thread = again.enlist_annotations(DashboardItemTarget(item.item_id))
    assert [v.body for v in thread] == ["TRUCK leads"]
    assert again.sessions.is_open(info.session_id)
    # minted ids resume after what is on disk
    second = again.add_dashboard_item(query_from_dict(BAR_DOC), "bar", "Priorities")
    assert second.item_id != item.item_id


def test_comment_refs_follow_annotation_lifecycle(plat):
    info = plat.open_session([JEAN], VirtualLocation("desk"))
    jean = plat.sessions.find_person(JEAN.mbox)
    item = plat.add_dashboard_item(query_from_dict(PIE_DOC), "pie", "Shipping modes")
    view = plat.add_annotation(info.session_id, jean, DashboardItemTarget(item.item_id),
                               "comment", "note to self")
    assert plat.get_dashboard_item(item.item_id).comment_refs == (view.annotation_id,)
    plat.delete_annotation(view.annotation_id, jean)
    assert plat.get_dashboard_item(item.item_id).comment_refs == ()


def test_deleting_item_keeps_annotation_history(plat):
    info = plat.open_session([JEAN], VirtualLocation("desk"))
    jean = plat.sessions.find_person(JEAN.mbox)
    item = plat.add_dashboard_item(query_from_dict(PIE_DOC), "pie", "Shipping modes")
    view = plat.add_annotation(info.session_id, jean, DashboardItemTarget(item.item_id),
                               "comment", "kept for history")
    plat.delete_dashboard_item(item.item_id)
    assert plat.list_dashboard_items() == ()
    survivor = plat.get_annotation(view.annotation_id)
    assert survivor.body == "kept for history"


def test_annotation_targets_must_exist(plat):
    info = plat.open_session([JEAN], VirtualLocation("desk"))
    jean = plat.sessions.find_person(JEAN.mbox)
    with pytest.raises(NotFoundError):
        plat.add_annotation(info.session_id, jean, CubeTarget("Ghost"), "comment", "x")
    with pytest.raises(NotFoundError):
        plat.add_annotation(info.session_id, jean,
                            DashboardItemTarget(IRI("urn:cbi:item:9")), "comment", "x")


def _build_summit_fixture(plat):
    """Two dashboard items with a threaded discussion on the first."""
    info = plat.open_session([JEAN, KIM], VirtualLocation("Data Summit booth"))
    jean = plat.sessions.find_person(JEAN.mbox)
    kim = plat.sessions.find_person(KIM.mbox)
    pie = plat.add_dashboard_item(query_from_dict(PIE_DOC), "pie", "Shipping modes",
                                  description="count by mode")
    bar = plat.add_dashboard_item(query_from_dict(BAR_DOC), "bar", "Order priorities")
    target = DashboardItemTarget(pie.item_id)
    plat.add_annotation(info.session_id, jean, target, "comment", "TRUCK leads")
    plat.clock.advance(60)
    question = plat.add_annotation(info.session_id, kim, target, "question",
                                   "is mode tied to priority?")
    plat.clock.advance(60)
    plat.add_annotation(info.session_id, jean, target, "answer",
                        "crosstab says no", in_reply_to=question.annotation_id)
    plat.add_annotation(info.session_id, kim, DashboardItemTarget(bar.item_id),
                        "description", "priorities are near-uniform")
    return info, pie, bar


def test_export_document_carries_threads(plat):
    _build_summit_fixture(plat)
    doc = plat.export_document()
    assert doc["formatVersion"] == 1
    assert [item["metadata"]["title"] for item in doc["items"]] == \
        ["Shipping modes", "Order priorities"]
    comments = doc["items"][0]["comments"]
    assert [c["kind"] for c in comments] == ["comment", "question", "answer"]
    assert [c["authorName"] for c in comments] == ["Jean", "Kim", "Jean"]
    assert comments[2]["replyTo"] == 1
    assert "replyTo" not in comments[0]
    assert "replyTo" not in comments[1]
    assert doc["items"][1]["comments"][0]["kind"] == "description"


def test_export_import_round_trip(plat, tmp_path, small_data_template):
    _build_summit_fixture(plat)
    exported = plat.export_document()

    fresh_dir = tmp_path / "fresh"
    shutil.copytree(small_data_template, fresh_dir)
    fresh = CollabPlatform(fresh_dir, clock=FakeClock())
    new_ids = fresh.import_document(exported)
    assert len(new_ids) == 2

    again = fresh.export_document()
    assert again["items"] == exported["items"]
    # imported queries execute to the same tables as the originals
    for item in fresh.list_dashboard_items():
        ours = plat.run_query_object(item.query)
        theirs = fresh.run_query_object(item.query)
        assert ours == theirs


def test_import_recreates_thread_in_closed_imported_session(plat, tmp_path, small_data_template):
    _build_summit_fixture(plat)
    exported = plat.export_document()
    fresh_dir = tmp_path / "fresh"
    shutil.copytree(small_data_template, fresh_dir)
    fresh = CollabPlatform(fresh_dir, clock=FakeClock())
    new_ids = fresh.import_document(exported)

    thread = fresh.enlist_annotations(DashboardItemTarget(new_ids[0]))
    assert [v.kind for v in thread] == ["comment", "question", "answer"]
    assert thread[2].in_reply_to == thread[1].annotation_id
    session = fresh.session_info(thread[0].session)
    assert session.closed
    assert session.location == VirtualLocation("imported")
    # original stamps preserved, so the thread order is the original order
    assert thread[0].created_at < thread[1].created_at < thread[2].created_at


def test_import_answer_without_link_gets_unknown_marker(plat):
    doc = {
        "formatVersion": 1,
        "exportedAt": "2024-06-01T10:00:00Z",
        "items": [{
            "queryDocument": PIE_DOC,
            "queryText": "",
            "metadata": {"title": "Orphans", "description": None, "chartType": "pie"},
            "comments": [{"kind": "answer", "body": "question lost in transit",
                          "authorName": "Jean", "createdAt": "2024-05-01T09:00:00Z"}],
        }],
    }
    (item_id,) = plat.import_document(doc)
    (view,) = plat.enlist_annotations(DashboardItemTarget(item_id))
    assert view.kind == "answer"
    assert view.in_reply_to is None
    assert view.reply_target_deleted == "unknown"


def test_import_failure_names_item_and_changes_nothing(plat):
    bad_query = {
        "formatVersion": 1,
        "exportedAt": "2024-06-01T10:00:00Z",
        "items": [
            {"queryDocument": PIE_DOC, "queryText": "",
             "metadata": {"title": "fine", "description": None, "chartType": "pie"},
             "comments": []},
            {"queryDocument": {"cube": "Lineorder", "measures": ["count"],
                               "dimensions": ["loGhost"]},
             "queryText": "",
             "metadata": {"title": "broken", "description": None, "chartType": "bar"},
             "comments": []},
        ],
    }
    with pytest.raises(ValidationError) as err:
        plat.import_document(bad_query)
    assert "export item 1" in str(err.value)
    assert plat.list_dashboard_items() == ()
    assert len(plat.kb) == 0


def test_import_rejects_reply_to_non_question(plat):
    doc = {
        "formatVersion": 1,
        "exportedAt": "2024-06-01T10:00:00Z",
        "items": [{
            "queryDocument": PIE_DOC,
            "queryText": "",
            "metadata": {"title": "bad thread", "description": None, "chartType": "pie"},
            "comments": [
                {"kind": "comment", "body": "not a question",
                 "authorName": "Jean", "createdAt": "2024-05-01T09:00:00Z"},
                {"kind": "answer", "body": "replying anyway",
                 "authorName": "Kim", "createdAt": "2024-05-01T09:01:00Z", "replyTo": 0},
            ],
        }],
    }
    with pytest.raises(ValidationError) as err:
        plat.import_document(doc)
    assert "comment 1" in str(err.value)
    assert plat.list_dashboard_items() == ()


def test_import_empty_document_is_a_no_op(plat):
    assert plat.import_document({"formatVersion": 1,
                                 "exportedAt": "2024-06-01T10:00:00Z",
                                 "items": []}) == []
    assert plat.list_dashboard_items() == ()
    assert len(plat.kb) == 0


def test_state_files_stay_parseable_after_mutations(plat, data_dir):
    _build_summit_fixture(plat)
    load_kb(data_dir / "cbiont.nt")
    restored = load_dashboard(data_dir / "dashboard.json", plat.run_query_object,
                              plat.minter)
    assert len(restored) == 2
    json.loads((data_dir / "dashboard.json").read_text())


def test_target_json_round_trips():
    for target in (CubeTarget("Lineorder"),
                   DashboardItemTarget(IRI("urn:cbi:item:3")),
                   QueryTarget('{"cube":"Lineorder","measures":["count"]}')):
        assert target_from_json(target_to_json(target)) == target
    with pytest.raises(ValidationError):
        target_from_json({"kind": "galaxy"})
    with pytest.raises(ValidationError):
        target_from_json("Lineorder")
