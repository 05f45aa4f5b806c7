"""Annotation lifecycle: comments, questions, answers, and descriptions
attached to a cube, a dashboard item, or a captured query state.

Annotations live entirely in the triple store. Add requires an open session
and a participating author; edit and delete are author-only and allowed at
any time. Deleting a question leaves replying answers with a
dangling-reference marker instead of cascading.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Callable, Union

from . import kb as k
from .errors import AuthorizationError, NotFoundError, StateError, ValidationError
from .kb import IRI, IriMinter, KnowledgeBase, Literal, Triple
from .sessions import SessionHandler

ANNOTATION_KINDS = ("comment", "question", "answer", "description")

_KIND_TO_CLASS = {
    "comment": k.COMMENT,
    "question": k.QUESTION,
    "answer": k.ANSWER,
    "description": k.DESCRIPTION,
}
_CLASS_TO_KIND = {v: name for name, v in _KIND_TO_CLASS.items()}


@dataclass(frozen=True)
class CubeTarget:
    cube: str

    def __post_init__(self):
        if not self.cube:
            raise ValidationError("cube target needs a cube name")


@dataclass(frozen=True)
class DashboardItemTarget:
    item_id: IRI


@dataclass(frozen=True)
class QueryTarget:
    """Snapshot of a query document (canonical JSON), so the discussion
    context survives later edits of the cube or dashboard."""

    canonical: str

    def __post_init__(self):
        if not self.canonical:
            raise ValidationError("query target needs a query document")


Target = Union[CubeTarget, DashboardItemTarget, QueryTarget]


def _target_predicate_object(target: Target):
    if isinstance(target, CubeTarget):
        return k.TARGETS_CUBE, Literal.text(target.cube)
    if isinstance(target, DashboardItemTarget):
        return k.TARGETS_DASHBOARD_ITEM, target.item_id
    if isinstance(target, QueryTarget):
        return k.CAPTURES_QUERY, Literal.text(target.canonical)
    raise ValidationError(f"unknown annotation target {target!r}")


def _target_from_triples(triples) -> Target:
    for t in triples:
        if t.predicate == k.TARGETS_CUBE:
            return CubeTarget(t.object.value)
        if t.predicate == k.TARGETS_DASHBOARD_ITEM:
            return DashboardItemTarget(t.object)
        if t.predicate == k.CAPTURES_QUERY:
            return QueryTarget(t.object.value)
    raise NotFoundError("annotation has no target triple")


@dataclass(frozen=True)
class AnnotationView:
    annotation_id: IRI
    kind: str
    body: str
    author: IRI
    session: IRI
    target: Target
    created_at: datetime
    modified_at: datetime
    in_reply_to: IRI | None = None
    # the lost question's identifier, or "unknown" when restored from an
    # export that carried no reply link
    reply_target_deleted: str | None = None


class AnnotationManager:
    def __init__(self, kb: KnowledgeBase, minter: IriMinter,
                 sessions: SessionHandler, clock: Callable[[], datetime]):
        self.kb = kb
        self.minter = minter
        self.sessions = sessions
        self.clock = clock

    def add_annotation(self, session: IRI, author: IRI, target: Target, kind: str,
                       body: str, in_reply_to: IRI | None = None,
                       created_at: datetime | None = None,
                       reply_lost: bool = False) -> IRI:
        """New annotation in an open session. `created_at` restores a
        previously exported annotation (normally the clock stamps it);
        `reply_lost` restores an answer whose question link the export did
        not carry, marking the reference as lost instead."""
        if kind not in ANNOTATION_KINDS:
            raise ValidationError(f"kind must be one of {ANNOTATION_KINDS}, got {kind!r}")
        if not isinstance(body, str) or not body.strip():
            raise ValidationError("annotation body must be non-empty")
        if not self.sessions.is_open(session):
            raise StateError(f"session {session.value} is closed")
        if author not in self.sessions.participants(session):
            raise AuthorizationError(
                f"{author.value} is not a participant of {session.value}")
        if reply_lost and (kind != "answer" or in_reply_to is not None):
            raise ValidationError("reply_lost applies only to answers without a reply link")
        if kind == "answer":
            if in_reply_to is None and not reply_lost:
                raise ValidationError("an answer must reply to a question")
            if in_reply_to is not None:
                replied = self.get_annotation(in_reply_to)
                if replied.kind != "question":
                    raise ValidationError(
                        f"answers may only reply to questions, not to a {replied.kind}")
        elif in_reply_to is not None:
            raise ValidationError(f"a {kind} cannot carry a reply link")

        stamp = Literal.date_time(created_at if created_at is not None else self.clock())
        annotation = self.minter.mint("annotation")
        predicate, obj = _target_predicate_object(target)
        triples = [
            Triple(annotation, k.TYPE, _KIND_TO_CLASS[kind]),
            Triple(annotation, k.HAS_BODY, Literal.text(body)),
            Triple(annotation, k.HAS_AUTHOR, author),
            Triple(annotation, k.ANNOTATES, session),
            Triple(annotation, predicate, obj),
            Triple(annotation, k.CREATED_AT, stamp),
            Triple(annotation, k.MODIFIED_AT, stamp),
        ]
        if in_reply_to is not None:
            triples.append(Triple(annotation, k.IN_REPLY_TO, in_reply_to))
        if reply_lost:
            triples.append(Triple(annotation, k.REPLY_TARGET_DELETED, Literal.text("unknown")))
        self.kb.apply_batch(assertions=triples)
        return annotation

    def get_annotation(self, annotation_id: IRI) -> AnnotationView:
        triples = self.kb.match(subject=annotation_id)
        if not triples:
            raise NotFoundError(f"unknown annotation {annotation_id.value}")
        by_pred = {}
        for t in triples:
            by_pred.setdefault(t.predicate, []).append(t)
        kind = _CLASS_TO_KIND[by_pred[k.TYPE][0].object]
        reply = by_pred.get(k.IN_REPLY_TO)
        dangling = by_pred.get(k.REPLY_TARGET_DELETED)
        return AnnotationView(
            annotation_id=annotation_id,
            kind=kind,
            body=by_pred[k.HAS_BODY][0].object.value,
            author=by_pred[k.HAS_AUTHOR][0].object,
            session=by_pred[k.ANNOTATES][0].object,
            target=_target_from_triples(triples),
            created_at=by_pred[k.CREATED_AT][0].object.value,
            modified_at=by_pred[k.MODIFIED_AT][0].object.value,
            in_reply_to=reply[0].object if reply else None,
            reply_target_deleted=dangling[0].object.value if dangling else None,
        )

    def edit_annotation(self, annotation_id: IRI, new_body: str, editor: IRI) -> AnnotationView:
        view = self.get_annotation(annotation_id)
        if editor != view.author:
            raise AuthorizationError(f"only the author may edit {annotation_id.value}")
        if not isinstance(new_body, str) or not new_body.strip():
            raise ValidationError("annotation body must be non-empty")
        # modifiedAt must strictly increase even under a coarse clock
        bumped = max(self.clock(), view.modified_at + timedelta(seconds=1))
        self.kb.apply_batch(
            retractions=[
                Triple(annotation_id, k.HAS_BODY, Literal.text(view.body)),
                Triple(annotation_id, k.MODIFIED_AT, Literal.date_time(view.modified_at)),
            ],
            assertions=[
                Triple(annotation_id, k.HAS_BODY, Literal.text(new_body)),
                Triple(annotation_id, k.MODIFIED_AT, Literal.date_time(bumped)),
            ])
        return self.get_annotation(annotation_id)

    def delete_annotation(self, annotation_id: IRI, requester: IRI) -> int:
        """Retract the annotation's whole triple footprint; answers that
        replied to it keep a dangling-reference marker. Returns the number
        of retracted triples."""
        view = self.get_annotation(annotation_id)
        if requester != view.author:
            raise AuthorizationError(f"only the author may delete {annotation_id.value}")
        footprint = self.kb.match(subject=annotation_id)
        retractions = list(footprint)
        assertions = []
        for reply in self.kb.match(predicate=k.IN_REPLY_TO, obj=annotation_id):
            retractions.append(reply)
            assertions.append(Triple(
                reply.subject, k.REPLY_TARGET_DELETED, Literal.text(annotation_id.value)))
        self.kb.apply_batch(assertions=assertions, retractions=retractions)
        return len(footprint)

    def annotation_exists(self, annotation_id: IRI) -> bool:
        return bool(self.kb.match(subject=annotation_id, predicate=k.TYPE))

    def enlist_annotations(self, target: Target, session: IRI | None = None) -> list:
        """All annotations on the target (and session, when given), ascending
        by createdAt with ties broken by annotation id."""
        predicate, obj = _target_predicate_object(target)
        views = []
        for t in self.kb.match(predicate=predicate, obj=obj):
            view = self.get_annotation(t.subject)
            if session is not None and view.session != session:
                continue
            views.append(view)
        views.sort(key=lambda v: (v.created_at, v.annotation_id.value))
        return views
