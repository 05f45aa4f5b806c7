"""Annotation lifecycle: add/edit/delete/enlist, authorization, reply
discipline, ordering, and survival across store round-trips."""

from datetime import datetime, timedelta, timezone

import pytest

from collabbi import kb as k
from collabbi.annotations import (
    AnnotationManager,
    CubeTarget,
    DashboardItemTarget,
    QueryTarget,
)
from collabbi.errors import (
    AuthorizationError,
    NotFoundError,
    StateError,
    ValidationError,
)
from collabbi.kb import IRI, IriMinter, parse_kb, serialize_kb
from collabbi.sessions import SessionHandler, UserProfile, VirtualLocation
from conftest import JEAN, KIM

T0 = datetime(2024, 6, 1, 10, 0, 0, tzinfo=timezone.utc)
PIE_TARGET = CubeTarget("Lineorder")


@pytest.fixture
def live(collab):
    """collab with an open Jean/Kim session."""
    collab.session = collab.sessions.open_session(
        [JEAN, KIM], VirtualLocation("Data Summit booth"), T0)
    collab.jean = collab.sessions.find_person("jean@example.org")
    collab.kim = collab.sessions.find_person("kim@example.org")
    return collab


def test_add_question_grows_question_instances(live):
    before = len(live.kb.instances_of(k.QUESTION))
    live.annotations.add_annotation(
        live.session, live.kim, QueryTarget('{"cube":"Lineorder"}'), "question",
        "is there a correlation between mode of shipment and delivery priorities?")
    assert len(live.kb.instances_of(k.QUESTION)) == before + 1


def test_view_fields_after_add(live):
    a = live.annotations.add_annotation(
        live.session, live.jean, PIE_TARGET, "comment", "TRUCK is most common")
    view = live.annotations.get_annotation(a)
    assert view.kind == "comment"
    assert view.body == "TRUCK is most common"
    assert view.author == live.jean
    assert view.session == live.session
    assert view.target == PIE_TARGET
    assert view.created_at == view.modified_at == T0
    assert view.in_reply_to is None


def test_add_validation(live):
    with pytest.raises(ValidationError):
        live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "comment", "")
    with pytest.raises(ValidationError):
        live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "memo", "x")
    with pytest.raises(NotFoundError):
        live.annotations.add_annotation(IRI("urn:cbi:session:404"), live.jean,
                                        PIE_TARGET, "comment", "x")


def test_non_participant_rejected(live):
    outsider = live.sessions.register_profile(
        UserProfile(display_name="Sam", mbox="sam@example.org"))
    with pytest.raises(AuthorizationError):
        live.annotations.add_annotation(live.session, outsider, PIE_TARGET, "comment", "hi")


def test_closed_session_rejects_new_annotations(live):
    live.sessions.close_session(live.session, T0 + timedelta(hours=1))
    with pytest.raises(StateError):
        live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "comment", "late")


def test_answer_reply_discipline(live):
    q = live.annotations.add_annotation(live.session, live.kim, PIE_TARGET,
                                        "question", "why TRUCK?")
    c = live.annotations.add_annotation(live.session, live.kim, PIE_TARGET,
                                        "comment", "just a note")
    with pytest.raises(ValidationError):
        live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                        "answer", "because...")
    with pytest.raises(ValidationError):
        live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                        "answer", "because...", in_reply_to=c)
    with pytest.raises(ValidationError):
        live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                        "comment", "aside", in_reply_to=q)
    a = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                        "answer", "cheapest per mile", in_reply_to=q)
    assert live.annotations.get_annotation(a).in_reply_to == q


def test_edit_replaces_body_keeps_identity(live):
    a = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                        "comment", "TRUCK wins")
    before = live.annotations.get_annotation(a)
    view = live.annotations.edit_annotation(a, "TRUCK is most common", live.jean)
    assert view.annotation_id == a
    assert view.body == "TRUCK is most common"
    assert view.created_at == before.created_at
    assert view.modified_at > before.modified_at


def test_edit_modified_at_strictly_increases_under_frozen_clock(live):
    a = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "comment", "v1")
    v1 = live.annotations.edit_annotation(a, "v2", live.jean)
    v2 = live.annotations.edit_annotation(a, "v3", live.jean)
    assert v2.modified_at > v1.modified_at > T0


def test_edit_authorization_and_validation(live):
    a = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "comment", "x")
    with pytest.raises(AuthorizationError):
        live.annotations.edit_annotation(a, "hijack", live.kim)
    with pytest.raises(ValidationError):
        live.annotations.edit_annotation(a, "   ", live.jean)
    with pytest.raises(NotFoundError):
        live.annotations.edit_annotation(IRI("urn:cbi:annotation:404"), "x", live.jean)


def test_edit_and_delete_allowed_after_close(live):
    a = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "comment", "x")
    live.sessions.close_session(live.session, T0 + timedelta(hours=1))
    live.annotations.edit_annotation(a, "still editable", live.jean)
    live.annotations.delete_annotation(a, live.jean)
    assert not live.annotations.annotation_exists(a)


def test_delete_removes_exact_footprint(live):
    a = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "comment", "x")
    footprint = len(live.kb.match(subject=a))
    total = len(live.kb)
    removed = live.annotations.delete_annotation(a, live.jean)
    assert removed == footprint == 7
    assert len(live.kb) == total - footprint
    assert live.kb.match(subject=a) == []
    assert live.annotations.enlist_annotations(PIE_TARGET) == []


def test_delete_authorization(live):
    a = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "comment", "x")
    with pytest.raises(AuthorizationError):
        live.annotations.delete_annotation(a, live.kim)
    with pytest.raises(NotFoundError):
        live.annotations.delete_annotation(IRI("urn:cbi:annotation:404"), live.jean)


def test_deleting_question_marks_answers_dangling(live):
    q = live.annotations.add_annotation(live.session, live.kim, PIE_TARGET,
                                        "question", "why TRUCK?")
    a = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                        "answer", "cheapest per mile", in_reply_to=q)
    live.annotations.delete_annotation(q, live.kim)
    view = live.annotations.get_annotation(a)
    assert view.in_reply_to is None
    assert view.reply_target_deleted == q.value
    assert not live.annotations.annotation_exists(q)


def test_restoring_answer_without_reply_link(live):
    # answers recreated from an export that lost their question link carry
    # an "unknown" marker instead of a reply
    a = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                        "answer", "orphaned on import",
                                        reply_lost=True)
    view = live.annotations.get_annotation(a)
    assert view.in_reply_to is None
    assert view.reply_target_deleted == "unknown"


def test_reply_lost_flag_is_answer_only(live):
    with pytest.raises(ValidationError):
        live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                        "comment", "not an answer",
                                        reply_lost=True)
    q = live.annotations.add_annotation(live.session, live.kim, PIE_TARGET,
                                        "question", "resolvable?")
    with pytest.raises(ValidationError):
        live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                        "answer", "has both", in_reply_to=q,
                                        reply_lost=True)


def test_enlist_orders_by_created_at_then_id(live):
    first = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                            "comment", "one")
    live.clock.advance(60)
    second = live.annotations.add_annotation(live.session, live.kim, PIE_TARGET,
                                             "comment", "two")
    # same timestamp as `second`: the id breaks the tie
    tied = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                           "comment", "three")
    views = live.annotations.enlist_annotations(PIE_TARGET)
    assert [v.annotation_id for v in views] == [first, second, tied]
    assert views == live.annotations.enlist_annotations(PIE_TARGET)  # stable


def test_enlist_filters_by_target_and_session(live):
    other_target = DashboardItemTarget(IRI("urn:cbi:item:1"))
    live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "comment", "on cube")
    live.annotations.add_annotation(live.session, live.kim, other_target, "comment", "on item")
    assert len(live.annotations.enlist_annotations(PIE_TARGET)) == 1
    assert len(live.annotations.enlist_annotations(other_target)) == 1
    assert live.annotations.enlist_annotations(CubeTarget("Ghost")) == []

    second_session = live.sessions.open_session([JEAN], VirtualLocation("later"), T0)
    live.annotations.add_annotation(second_session, live.jean, PIE_TARGET, "comment", "again")
    assert len(live.annotations.enlist_annotations(PIE_TARGET)) == 2
    assert len(live.annotations.enlist_annotations(PIE_TARGET, session=live.session)) == 1


def test_query_targets_distinguish_snapshots(live):
    t1 = QueryTarget('{"cube":"Lineorder","measures":["count"]}')
    t2 = QueryTarget('{"cube":"Lineorder","measures":["loRevenue"]}')
    live.annotations.add_annotation(live.session, live.jean, t1, "comment", "a")
    live.annotations.add_annotation(live.session, live.jean, t2, "comment", "b")
    assert len(live.annotations.enlist_annotations(t1)) == 1
    assert len(live.annotations.enlist_annotations(t2)) == 1


def test_every_author_is_a_participant(live):
    live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "comment", "a")
    live.annotations.add_annotation(live.session, live.kim, PIE_TARGET, "comment", "b")
    for view in live.annotations.enlist_annotations(PIE_TARGET):
        assert view.author in live.sessions.participants(view.session)


def test_annotations_in_transitive_closure(live):
    live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "comment", "a")
    q = live.annotations.add_annotation(live.session, live.kim, PIE_TARGET, "question", "b?")
    live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                    "answer", "c", in_reply_to=q)
    live.annotations.add_annotation(live.session, live.kim, PIE_TARGET, "description", "d")
    assert len(live.kb.instances_of(k.ANNOTATION, transitive=True)) == 4


def test_enlist_survives_kb_roundtrip(live):
    live.annotations.add_annotation(live.session, live.jean, PIE_TARGET, "comment", "one")
    live.clock.advance()
    live.annotations.add_annotation(live.session, live.kim, PIE_TARGET, "comment", "two")
    before = live.annotations.enlist_annotations(PIE_TARGET)

    reloaded = parse_kb(serialize_kb(live.kb))
    minter = IriMinter()
    minter.observe_kb(reloaded)
    sessions = SessionHandler(reloaded, minter)
    rebuilt = AnnotationManager(reloaded, minter, sessions, live.clock)
    assert rebuilt.enlist_annotations(PIE_TARGET) == before


def test_restored_created_at_is_preserved(live):
    older = T0 - timedelta(days=30)
    a = live.annotations.add_annotation(live.session, live.jean, PIE_TARGET,
                                        "comment", "from an export", created_at=older)
    view = live.annotations.get_annotation(a)
    assert view.created_at == older
    assert view.modified_at == older
