"""End-to-end acceptance gate.

Nine criteria, one test each, at desk scale (seed 42, 10,000 fact rows).
Each test prints `[acceptance] criterion N: PASS|FAIL`; the terminal
summary hook in conftest repeats the verdicts at the end of the run.
"""

import json
import os
import shutil
import signal
import subprocess
import sys
from contextlib import contextmanager
from dataclasses import replace

import pytest
from fastapi.testclient import TestClient

from collabbi.annotations import CubeTarget, DashboardItemTarget
from collabbi.api import create_app
from collabbi.cube import default_cube_document, parse_cube, validate_cube
from collabbi.engine import (
    Filter,
    drill_down,
    execute,
    query_from_dict,
    query_to_dict,
    roll_up,
    slice_dice,
)
from collabbi.errors import AuthorizationError, DomainError, StateError
from collabbi.kb import (
    ANNOTATION,
    ANSWER,
    COMMENT,
    DESCRIPTION,
    IRI,
    Literal,
    QUESTION,
    TYPE,
    Triple,
    KnowledgeBase,
    parse_kb,
    serialize_kb,
)
from collabbi.platform import CollabPlatform, save_dataset
from collabbi.rng import SplitMix64
from collabbi.sessions import VirtualLocation
from collabbi.ssb import (
    ORDERPRIORITY_DOMAIN,
    SCHEMAS,
    SHIPMODE_DOMAIN,
    generate_dataset,
    load_csv,
)

from conftest import JEAN, KIM, FakeClock, load_query_fixture
from oracle import _distinct_samples, oracle_execute, random_query, results_equal
from test_kb import fixture_kb


@contextmanager
def criterion(n: int):
    try:
        yield
    except BaseException:
        print(f"[acceptance] criterion {n}: FAIL")
        raise
    print(f"[acceptance] criterion {n}: PASS")


@pytest.fixture(scope="session")
def desk_data_template(tmp_path_factory, dataset):
    base = tmp_path_factory.mktemp("desk-data")
    save_dataset(dataset, base)
    return base


@pytest.fixture
def desk_data_dir(desk_data_template, tmp_path):
    target = tmp_path / "data"
    shutil.copytree(desk_data_template, target)
    return target


def test_criterion_1_oracle_equivalence(lineorder_cube, dataset):
    with criterion(1):
        rng = SplitMix64(2024)
        avg_measures = {m.name for m in lineorder_cube.measures if m.kind == "avg"}
        for _ in range(200):
            query = random_query(lineorder_cube, dataset, rng)
            got = execute(query, lineorder_cube, dataset)
            want = oracle_execute(query, lineorder_cube, dataset)
            assert results_equal(got, want, avg_measures=avg_measures), query


def test_criterion_2_closed_domains():
    with criterion(2):
        for seed in (1, 42, 97):
            table = generate_dataset(seed=seed, fact_rows=2_000).table("lineorder")
            assert set(table.column("lo_shipmode").tolist()) <= set(SHIPMODE_DOMAIN)
            assert set(table.column("lo_orderpriority").tolist()) \
                <= set(ORDERPRIORITY_DOMAIN)
        assert len(SHIPMODE_DOMAIN) == 7
        assert len(ORDERPRIORITY_DOMAIN) == 5

        # a crafted row outside either domain is rejected at load
        schema = SCHEMAS["lineorder"]
        names = [name for name, _ in schema.columns]
        good = ("1|1|1|1|1994-01-05|URGENT|0|10|100.00|100.00|2|100.00|50.00|3"
                "|1994-02-04|TRUCK")
        assert len(good.split("|")) == len(names)

        for column, bogus in (("lo_shipmode", "TELEPORT"),
                              ("lo_orderpriority", "WHENEVER")):
            fields = good.split("|")
            fields[names.index(column)] = bogus
            with pytest.raises(DomainError) as err:
                load_csv(schema, "|".join(fields) + "\n")
            assert bogus in str(err.value) and column in str(err.value)


def test_criterion_3_use_case_fixture(lineorder_cube, dataset):
    with criterion(3):
        pie = execute(query_from_dict(load_query_fixture("fig5_pie")),
                      lineorder_cube, dataset)
        assert [h for h in pie.header] == ["loShipmode", "count"]
        assert sum(r[-1] for r in pie.rows) == 10_000

        bar = execute(query_from_dict(load_query_fixture("fig5_bar")),
                      lineorder_cube, dataset)
        assert sum(r[-1] for r in bar.rows) == 10_000

        crosstab = execute(query_from_dict(load_query_fixture("fig6")),
                           lineorder_cube, dataset)
        assert len(crosstab.rows) <= 6

        # independent row scan over the two filter columns
        modes = dataset.table("lineorder").column("lo_shipmode").tolist()
        priorities = dataset.table("lineorder").column("lo_orderpriority").tolist()
        expected = sum(1 for m, p in zip(modes, priorities)
                       if m in ("TRUCK", "AIR") and p in ("HIGH", "LOW", "URGENT"))
        assert sum(r[-1] for r in crosstab.rows) == expected


def _as_cents(value):
    # count cells are ints; currency cells are cents shown /100. Scaling
    # everything by 100 makes re-aggregation exact in integer space.
    return round(value * 100)


def test_criterion_4_olap_operator_laws(lineorder_cube, dataset):
    with criterion(4):
        rng = SplitMix64(77)
        dimension_names = [d.name for d in lineorder_cube.dimensions]
        for _ in range(50):
            query = random_query(lineorder_cube, dataset, rng, sum_count_only=True)
            query = replace(query, order_by=(), limit=None)
            if not query.dimensions:
                query = replace(query, dimensions=(rng.choice(dimension_names),))
            if not query.measures:
                query = replace(query, measures=("count",))

            # roll_up additivity: fine groups sum to their coarse group
            fine = execute(query, lineorder_cube, dataset)
            coarse = execute(roll_up(query), lineorder_cube, dataset)
            keys = len(query.dimensions) + (1 if query.time_dimension else 0)
            folded: dict = {}
            for row in fine.rows:
                key = row[:keys - 1] if query.time_dimension is None \
                    else row[:len(query.dimensions) - 1] + row[len(query.dimensions):keys]
                cells = tuple(_as_cents(v) for v in row[keys:])
                acc = folded.get(key)
                folded[key] = cells if acc is None else \
                    tuple(a + b for a, b in zip(acc, cells))
            assert folded == {
                row[:keys - 1]: tuple(_as_cents(v) for v in row[keys - 1:])
                for row in coarse.rows}

            # drill_down never duplicates a dimension
            drilled = drill_down(query, lineorder_cube, "count")
            assert len(set(drilled.dimensions)) == len(drilled.dimensions)
            assert len(set(drill_down(drilled, lineorder_cube, "count").dimensions)) \
                == len(drilled.dimensions)

            # slice_dice equivalence: filter-then-execute == execute-then-filter
            member = query.dimensions[rng.randint(0, len(query.dimensions) - 1)]
            base = replace(query,
                           filters=tuple(f for f in query.filters if f.member != member))
            values = tuple(_distinct_samples(lineorder_cube, dataset, member, rng, 2))
            flt = Filter(member=member, operator="in", values=values)
            sliced_result = execute(slice_dice(base, [flt], lineorder_cube),
                                    lineorder_cube, dataset)
            position = base.dimensions.index(member)
            survivors = tuple(r for r in execute(base, lineorder_cube, dataset).rows
                              if r[position] in values)
            assert sliced_result.rows == survivors


def test_criterion_5_cube_document_parse(dataset):
    with criterion(5):
        schema = parse_cube(default_cube_document())
        assert len(schema.measures) == 5
        assert len(schema.dimensions) == 9

        kinds = {m.name: m.kind for m in schema.measures}
        assert kinds == {"count": "count", "loOrdtotalprice": "sum",
                         "loExtendedprice": "sum", "loQuantity": "sum",
                         "loRevenue": "sum"}
        count = schema.measure("count")
        assert list(count.drill_members) == ["loOrderdate", "loCommitdate",
                                             "loOrderpriority", "loShipmode"]
        assert schema.measure("loOrdtotalprice").format == "currency"

        dimension_kinds = {d.name: d.kind for d in schema.dimensions}
        assert dimension_kinds == {
            "loLinenumber": "string", "loOrderdate": "time",
            "loCommitdate": "time", "loOrderpriority": "string",
            "loShipmode": "string", "loShippriority": "string",
            "loDiscount": "number", "loSupplycost": "number", "loTax": "number"}

        problems = [d for d in validate_cube(schema, dataset) if d.severity == "error"]
        assert problems == []


def test_criterion_6_kb_properties():
    with criterion(6):
        # a deterministic random store, well under the 1,000 triple cap
        rng = SplitMix64(9)
        subjects = [IRI(f"urn:x:s{i}") for i in range(40)]
        predicates = [IRI(f"urn:x:p{i}") for i in range(6)]
        objects = subjects[:10] + [Literal.text(f"v{i}") for i in range(20)] \
            + [Literal.integer(i) for i in range(10)]
        kb = KnowledgeBase()
        triples = []
        for _ in range(800):
            t = Triple(rng.choice(subjects), rng.choice(predicates),
                       rng.choice(objects))
            triples.append(t)
            kb.assert_triple(t)
        assert len(kb) == len(set(triples)) <= 1_000

        # idempotence: re-asserting every triple changes nothing
        for t in triples:
            assert kb.assert_triple(t) is False
        assert len(kb) == len(set(triples))

        # match agrees with a naive filter over the raw triple set
        from collabbi.kb import render_term

        def naive(s, p, o):
            hits = [t for t in kb.triples()
                    if (s is None or t.subject == s)
                    and (p is None or t.predicate == p)
                    and (o is None or t.object == o)]
            hits.sort(key=lambda t: (render_term(t.subject),
                                     render_term(t.predicate),
                                     render_term(t.object)))
            return hits

        probes = [(None, None, None)]
        for _ in range(60):
            s = rng.choice(subjects + [None, IRI("urn:x:absent")])
            p = rng.choice(predicates + [None])
            o = rng.choice(objects + [None])
            probes.append((s, p, o))
        for s, p, o in probes:
            assert kb.match(s, p, o) == naive(s, p, o)

        # transitive instances_of equals the union over the four subclasses
        typed = KnowledgeBase()
        subclasses = (COMMENT, QUESTION, ANSWER, DESCRIPTION)
        for i in range(60):
            typed.assert_triple(Triple(IRI(f"urn:cbi:annotation:{i}"), TYPE,
                                       rng.choice(subclasses)))
        union = set()
        for cls in subclasses:
            union.update(typed.instances_of(cls))
        assert typed.instances_of(ANNOTATION, transitive=True) \
            == sorted(union, key=lambda iri: iri.value)

        # serialize then parse is the identity on the two-person fixture
        fixture = fixture_kb()
        text = serialize_kb(fixture)
        assert parse_kb(text).triples() == fixture.triples()
        assert serialize_kb(parse_kb(text)) == text


def test_criterion_7_annotation_lifecycle(collab):
    with criterion(7):
        sid = collab.sessions.open_session([JEAN, KIM], VirtualLocation("desk"),
                                           collab.clock())
        jean, kim = collab.sessions.session_info(sid).participants
        target = CubeTarget("Lineorder")

        added = collab.annotations.add_annotation(sid, jean, target, "comment",
                                                  "TRUCK looks high")
        collab.clock.advance(30)
        question = collab.annotations.add_annotation(sid, kim, target, "question",
                                                     "seasonal effect?")

        # add round-trips through get
        view = collab.annotations.get_annotation(added)
        assert (view.kind, view.body, view.author) == ("comment",
                                                       "TRUCK looks high", jean)

        # enlist ordering is stable across calls and follows creation time
        first = collab.annotations.enlist_annotations(target)
        assert [v.annotation_id for v in first] == [added, question]
        assert collab.annotations.enlist_annotations(target) == first

        # author-only edit
        with pytest.raises(AuthorizationError):
            collab.annotations.edit_annotation(added, "mine now", kim)
        collab.clock.advance(30)
        edited = collab.annotations.edit_annotation(added, "TRUCK spike", jean)
        assert edited.body == "TRUCK spike"
        assert edited.created_at == view.created_at
        assert edited.modified_at > view.modified_at

        # delete removes from enlistment
        collab.annotations.delete_annotation(question, kim)
        remaining = collab.annotations.enlist_annotations(target)
        assert [v.annotation_id for v in remaining] == [added]

        # annotations on a closed session are a state conflict
        collab.sessions.close_session(sid, collab.clock())
        with pytest.raises(StateError):
            collab.annotations.add_annotation(sid, jean, target, "comment", "late")


def _build_shared_dashboard(platform):
    session = platform.open_session([JEAN, KIM], VirtualLocation("weekly"))
    jean, kim = session.participants
    sid = session.session_id

    items = [
        platform.add_dashboard_item(
            query_from_dict(load_query_fixture("fig5_pie")), "pie",
            "Orders by ship mode"),
        platform.add_dashboard_item(
            query_from_dict(load_query_fixture("fig5_bar")), "bar",
            "Orders by priority", description="watching URGENT"),
        platform.add_dashboard_item(
            query_from_dict(load_query_fixture("fig6")), "table",
            "Mode by priority"),
    ]

    def comment(item, author, kind, body, reply=None):
        return platform.add_annotation(sid, author,
                                       DashboardItemTarget(item.item_id),
                                       kind, body, in_reply_to=reply)

    comment(items[0], jean, "comment", "TRUCK dominates")
    q = comment(items[1], kim, "question", "why is URGENT flat?")
    comment(items[1], jean, "answer", "quota capped since March",
            reply=q.annotation_id)
    comment(items[2], kim, "comment", "AIR and TRUCK only here")
    comment(items[2], jean, "description", "the quarterly review crosstab")
    platform.close_session(sid)
    return items


def test_criterion_8_export_round_trip(desk_data_dir):
    with criterion(8):
        platform = CollabPlatform(desk_data_dir, clock=FakeClock())
        items = _build_shared_dashboard(platform)
        exported = platform.export_document()
        assert len(exported["items"]) == 3
        assert sum(len(i["comments"]) for i in exported["items"]) >= 5

        baseline = {
            item.item_id.value: platform.run_query_object(item.query)
            for item in items
        }

        # wipe the collaboration state, keep the dataset
        os.remove(platform.kb_path)
        os.remove(platform.dashboard_path)
        wiped = CollabPlatform(desk_data_dir, clock=FakeClock())
        assert wiped.list_dashboard_items() == ()

        wiped.import_document(exported)
        again = wiped.export_document()
        assert again["items"] == exported["items"]
        assert again["formatVersion"] == exported["formatVersion"]

        # every re-imported query re-executes to an identical table
        restored = wiped.list_dashboard_items()
        assert len(restored) == len(items)
        for original, item in zip(items, restored):
            assert wiped.run_query_object(item.query) \
                == baseline[original.item_id.value]


def test_criterion_9_service_parity_and_durability(
        lineorder_cube, dataset, desk_data_dir, tmp_path):
    with criterion(9):
        platform = CollabPlatform(desk_data_dir, clock=FakeClock())
        client = TestClient(create_app(platform), raise_server_exceptions=False)

        rng = SplitMix64(512)
        for _ in range(20):
            doc = query_to_dict(random_query(lineorder_cube, dataset, rng))
            response = client.post("/api/query", json=doc)
            assert response.status_code == 200
            assert response.json() == platform.run_query(doc).to_dict()

        # a writer killed mid-checkpoint must leave both state files parseable
        child_code = (
            "import sys\n"
            "from collabbi.engine import query_from_dict\n"
            "from collabbi.platform import CollabPlatform\n"
            "from collabbi.sessions import UserProfile, VirtualLocation\n"
            "p = CollabPlatform(sys.argv[1])\n"
            "q = query_from_dict({'cube': 'Lineorder', 'measures': ['count'],\n"
            "                     'dimensions': ['loShipmode']})\n"
            "i = 0\n"
            "while True:\n"
            "    i += 1\n"
            "    s = p.open_session([UserProfile(display_name=f'W{i}',\n"
            "                                    mbox=f'w{i}@example.org')],\n"
            "                       VirtualLocation('loop'))\n"
            "    item = p.add_dashboard_item(q, 'pie', f'chart {i}')\n"
            "    p.close_session(s.session_id)\n"
            "    p.delete_dashboard_item(item.item_id)\n"
            "    print('tick', i, flush=True)\n"
        )
        writer_dir = tmp_path / "writer"
        shutil.copytree(desk_data_dir, writer_dir)
        child = subprocess.Popen([sys.executable, "-c", child_code, str(writer_dir)],
                                 stdout=subprocess.PIPE, text=True)
        try:
            for _ in range(12):  # let a dozen checkpoint cycles complete
                assert child.stdout.readline().startswith("tick")
        finally:
            child.send_signal(signal.SIGKILL)
            child.wait()

        survivor = CollabPlatform(writer_dir)  # parses both files or raises
        assert len(survivor.kb) > 0
        persisted = json.loads((writer_dir / "dashboard.json").read_text())
        assert persisted["formatVersion"] == 1
