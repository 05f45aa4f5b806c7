"""Triple store for collaboration records.

Facts are (subject, predicate, object) triples over a small built-in
vocabulary: person/profile terms, time intervals, places, and the
collaboration-session and annotation terms. The store keeps set semantics,
answers wildcard pattern matches in a deterministic order, infers instance
membership through the subclass graph, and serializes to a line-oriented
format (an N-Triples-compatible subset) suitable for diffing and atomic
on-disk checkpoints.
"""

from __future__ import annotations

import os
import re
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Union

from .errors import NotFoundError, ParseError, ValidationError

# characters excluded from IRIs, per the N-Triples IRIREF production
_IRI_BAD = re.compile(r'[\x00-\x20<>"{}|^`\\]')

LITERAL_KINDS = ("text", "integer", "dateTime", "decimal", "geo")

_XSD = "http://www.w3.org/2001/XMLSchema#"
XSD_INTEGER = _XSD + "integer"
XSD_DATETIME = _XSD + "dateTime"
XSD_DECIMAL = _XSD + "decimal"
GEO_DATATYPE = "urn:cbi:type:geo"

_DATATYPE_TO_KIND = {
    XSD_INTEGER: "integer",
    XSD_DATETIME: "dateTime",
    XSD_DECIMAL: "decimal",
    GEO_DATATYPE: "geo",
}
_KIND_TO_DATATYPE = {v: k for k, v in _DATATYPE_TO_KIND.items()}


@dataclass(frozen=True)
class IRI:
    value: str

    def __post_init__(self):
        if not self.value:
            raise ValidationError("IRI must be non-empty")
        if _IRI_BAD.search(self.value):
            raise ValidationError(f"malformed IRI {self.value!r}")


def format_timestamp(dt: datetime) -> str:
    """Canonical wire form: UTC, second precision, trailing Z."""
    return dt.astimezone(timezone.utc).replace(microsecond=0).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(text: str) -> datetime:
    if not isinstance(text, str):
        raise ValidationError(f"timestamp must be a string, got {type(text).__name__}")
    raw = text[:-1] + "+00:00" if text.endswith("Z") else text
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError:
        raise ValidationError(f"not an ISO-8601 timestamp: {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


@dataclass(frozen=True)
class Literal:
    """Typed literal value: text, integer, dateTime, decimal, or a
    geo-coordinate pair."""

    kind: str
    value: object

    def __post_init__(self):
        if self.kind not in LITERAL_KINDS:
            raise ValidationError(f"unknown literal kind {self.kind!r}")
        v = self.value
        if self.kind == "text" and not isinstance(v, str):
            raise ValidationError("text literal needs a str value")
        if self.kind == "integer" and not (isinstance(v, int) and not isinstance(v, bool)):
            raise ValidationError("integer literal needs an int value")
        if self.kind == "dateTime":
            if not isinstance(v, datetime) or v.tzinfo is None:
                raise ValidationError("dateTime literal needs a timezone-aware datetime")
            canonical = v.astimezone(timezone.utc).replace(microsecond=0)
            object.__setattr__(self, "value", canonical)
        if self.kind == "decimal":
            if not isinstance(v, Decimal):
                raise ValidationError("decimal literal needs a Decimal value")
            if not v.is_finite():
                raise ValidationError(f"decimal literal must be finite, got {v}")
        if self.kind == "geo":
            if not (isinstance(v, tuple) and len(v) == 2
                    and all(isinstance(c, Decimal) and c.is_finite() for c in v)):
                raise ValidationError("geo literal needs a (Decimal, Decimal) pair")

    @staticmethod
    def text(value: str) -> "Literal":
        return Literal("text", value)

    @staticmethod
    def integer(value: int) -> "Literal":
        return Literal("integer", value)

    @staticmethod
    def date_time(value: datetime) -> "Literal":
        return Literal("dateTime", value)

    @staticmethod
    def decimal(value) -> "Literal":
        return Literal("decimal", Decimal(str(value)) if not isinstance(value, Decimal) else value)

    @staticmethod
    def geo(latitude, longitude) -> "Literal":
        to_dec = lambda c: c if isinstance(c, Decimal) else Decimal(str(c))
        return Literal("geo", (to_dec(latitude), to_dec(longitude)))

    def lexical(self) -> str:
        if self.kind == "text":
            return self.value
        if self.kind == "integer":
            return str(self.value)
        if self.kind == "dateTime":
            return format_timestamp(self.value)
        if self.kind == "decimal":
            return format(self.value, "f")
        lat, lon = self.value
        return f"{format(lat, 'f')},{format(lon, 'f')}"


Term = Union[IRI, Literal]


@dataclass(frozen=True)
class Triple:
    subject: IRI
    predicate: IRI
    object: Term

    def __post_init__(self):
        if not isinstance(self.subject, IRI):
            raise ValidationError("triple subject must be an IRI")
        if not isinstance(self.predicate, IRI):
            raise ValidationError("triple predicate must be an IRI")
        if not isinstance(self.object, (IRI, Literal)):
            raise ValidationError("triple object must be an IRI or a Literal")


# --- built-in vocabulary -----------------------------------------------------

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
UPO_NS = "urn:cbi:upo#"
CSO_NS = "urn:cbi:cso#"

TYPE = IRI(RDF_NS + "type")
SUBCLASS_OF = IRI(RDFS_NS + "subClassOf")

# profile and context terms
PERSON = IRI(UPO_NS + "Person")
NAME = IRI(UPO_NS + "name")
MBOX = IRI(UPO_NS + "mbox")
KNOWS = IRI(UPO_NS + "knows")
ORGANIZATION = IRI(UPO_NS + "organization")
INSTANT = IRI(UPO_NS + "Instant")
INTERVAL = IRI(UPO_NS + "Interval")
START = IRI(UPO_NS + "start")
END = IRI(UPO_NS + "end")
PLACE = IRI(UPO_NS + "Place")
LOCATED_IN = IRI(UPO_NS + "locatedIn")
LATITUDE = IRI(UPO_NS + "latitude")
LONGITUDE = IRI(UPO_NS + "longitude")
VIRTUAL_LOCATION = IRI(UPO_NS + "virtualLocation")

# collaboration-session and annotation terms
COLLABORATIVE_SESSION = IRI(CSO_NS + "CollaborativeSession")
ANNOTATION = IRI(CSO_NS + "Annotation")
COMMENT = IRI(CSO_NS + "Comment")
QUESTION = IRI(CSO_NS + "Question")
ANSWER = IRI(CSO_NS + "Answer")
DESCRIPTION = IRI(CSO_NS + "Description")
HAS_PARTICIPANT = IRI(CSO_NS + "hasParticipant")
HAS_INTERVAL = IRI(CSO_NS + "hasInterval")
ANNOTATES = IRI(CSO_NS + "annotates")
HAS_BODY = IRI(CSO_NS + "hasBody")
HAS_AUTHOR = IRI(CSO_NS + "hasAuthor")
CREATED_AT = IRI(CSO_NS + "createdAt")
MODIFIED_AT = IRI(CSO_NS + "modifiedAt")
TARGETS_CUBE = IRI(CSO_NS + "targetsCube")
TARGETS_DASHBOARD_ITEM = IRI(CSO_NS + "targetsDashboardItem")
CAPTURES_QUERY = IRI(CSO_NS + "capturesQuery")
IN_REPLY_TO = IRI(CSO_NS + "inReplyTo")
REPLY_TARGET_DELETED = IRI(CSO_NS + "replyTargetDeleted")


@dataclass(frozen=True)
class PropertySpec:
    """A property term with informal domain/range hints (not enforced)."""

    iri: IRI
    domain: IRI | None = None
    range_hint: str | None = None  # a class IRI string or a literal kind


@dataclass(frozen=True)
class Vocabulary:
    classes: frozenset
    subclass_edges: frozenset  # of (subclass IRI, superclass IRI)
    properties: tuple

    def __post_init__(self):
        for sub, sup in self.subclass_edges:
            if sub not in self.classes or sup not in self.classes:
                raise ValidationError(f"subclass edge uses undeclared class: {sub.value} -> {sup.value}")
        self._check_acyclic()

    def _check_acyclic(self):
        children: dict[IRI, list[IRI]] = {}
        for sub, sup in self.subclass_edges:
            children.setdefault(sup, []).append(sub)
        visiting: set[IRI] = set()
        done: set[IRI] = set()

        def visit(node: IRI):
            if node in done:
                return
            if node in visiting:
                raise ValidationError(f"subclass cycle through {node.value}")
            visiting.add(node)
            for child in children.get(node, ()):
                visit(child)
            visiting.discard(node)
            done.add(node)

        for cls in self.classes:
            visit(cls)

    def is_class(self, iri: IRI) -> bool:
        return iri in self.classes

    def is_property(self, iri: IRI) -> bool:
        return any(p.iri == iri for p in self.properties)

    def subclass_closure(self, cls: IRI) -> frozenset:
        """The class itself plus all (transitive) subclasses."""
        if cls not in self.classes:
            raise NotFoundError(f"unknown class {cls.value}")
        children: dict[IRI, list[IRI]] = {}
        for sub, sup in self.subclass_edges:
            children.setdefault(sup, []).append(sub)
        out = {cls}
        frontier = [cls]
        while frontier:
            node = frontier.pop()
            for child in children.get(node, ()):
                if child not in out:
                    out.add(child)
                    frontier.append(child)
        return frozenset(out)


def cbiont_vocabulary() -> Vocabulary:
    classes = frozenset({
        PERSON, INSTANT, INTERVAL, PLACE,
        COLLABORATIVE_SESSION, ANNOTATION, COMMENT, QUESTION, ANSWER, DESCRIPTION,
    })
    subclass_edges = frozenset({
        (COMMENT, ANNOTATION),
        (QUESTION, ANNOTATION),
        (ANSWER, ANNOTATION),
        (DESCRIPTION, ANNOTATION),
    })
    properties = (
        PropertySpec(NAME, None, "text"),
        PropertySpec(MBOX, PERSON, "text"),
        PropertySpec(KNOWS, PERSON, PERSON.value),
        PropertySpec(ORGANIZATION, PERSON, "text"),
        PropertySpec(START, INTERVAL, "dateTime"),
        PropertySpec(END, INTERVAL, "dateTime"),
        PropertySpec(LOCATED_IN, COLLABORATIVE_SESSION, PLACE.value),
        PropertySpec(LATITUDE, PLACE, "decimal"),
        PropertySpec(LONGITUDE, PLACE, "decimal"),
        PropertySpec(VIRTUAL_LOCATION, COLLABORATIVE_SESSION, "text"),
        PropertySpec(HAS_PARTICIPANT, COLLABORATIVE_SESSION, PERSON.value),
        PropertySpec(HAS_INTERVAL, COLLABORATIVE_SESSION, INTERVAL.value),
        PropertySpec(ANNOTATES, ANNOTATION, COLLABORATIVE_SESSION.value),
        PropertySpec(HAS_BODY, ANNOTATION, "text"),
        PropertySpec(HAS_AUTHOR, ANNOTATION, PERSON.value),
        PropertySpec(CREATED_AT, ANNOTATION, "dateTime"),
        PropertySpec(MODIFIED_AT, ANNOTATION, "dateTime"),
        PropertySpec(TARGETS_CUBE, ANNOTATION, "text"),
        PropertySpec(TARGETS_DASHBOARD_ITEM, ANNOTATION, None),
        PropertySpec(CAPTURES_QUERY, ANNOTATION, "text"),
        PropertySpec(IN_REPLY_TO, ANNOTATION, ANNOTATION.value),
        PropertySpec(REPLY_TARGET_DELETED, ANNOTATION, "text"),
    )
    return Vocabulary(classes=classes, subclass_edges=subclass_edges, properties=properties)


# --- term rendering and parsing ----------------------------------------------

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def render_term(term: Term) -> str:
    if isinstance(term, IRI):
        return f"<{term.value}>"
    quoted = f'"{_escape(term.lexical())}"'
    if term.kind == "text":
        return quoted
    return f"{quoted}^^<{_KIND_TO_DATATYPE[term.kind]}>"


def render_triple(t: Triple) -> str:
    return f"{render_term(t.subject)} {render_term(t.predicate)} {render_term(t.object)} ."


class _LineScanner:
    def __init__(self, line: str, line_no: int):
        self.text = line
        self.pos = 0
        self.line_no = line_no

    def fail(self, message: str):
        raise ParseError(message, line=self.line_no)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def read_iri(self) -> IRI:
        if self.peek() != "<":
            self.fail(f"expected '<' at column {self.pos + 1}")
        end = self.text.find(">", self.pos + 1)
        if end < 0:
            self.fail("unterminated IRI")
        raw = self.text[self.pos + 1:end]
        self.pos = end + 1
        try:
            return IRI(raw)
        except ValidationError as exc:
            self.fail(str(exc))

    def read_quoted(self) -> str:
        if self.peek() != '"':
            self.fail(f"expected '<' or '\"' at column {self.pos + 1}")
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(self.text):
                self.fail("unterminated literal quote")
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                self.pos += 1
                if self.pos >= len(self.text):
                    self.fail("dangling escape at end of line")
                esc = self.text[self.pos]
                if esc == "u":
                    hexpart = self.text[self.pos + 1:self.pos + 5]
                    if len(hexpart) != 4 or any(c not in "0123456789abcdefABCDEF" for c in hexpart):
                        self.fail("bad \\u escape")
                    out.append(chr(int(hexpart, 16)))
                    self.pos += 5
                    continue
                mapped = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}.get(esc)
                if mapped is None:
                    self.fail(f"unknown escape \\{esc}")
                out.append(mapped)
                self.pos += 1
            else:
                out.append(ch)
                self.pos += 1

    def read_object(self) -> Term:
        if self.peek() == "<":
            return self.read_iri()
        lexical = self.read_quoted()
        kind = "text"
        if self.text[self.pos:self.pos + 2] == "^^":
            self.pos += 2
            datatype = self.read_iri()
            kind = _DATATYPE_TO_KIND.get(datatype.value)
            if kind is None:
                self.fail(f"unknown literal datatype <{datatype.value}>")
        return self._literal_from_lexical(kind, lexical)

    def _literal_from_lexical(self, kind: str, lexical: str) -> Literal:
        if kind == "geo" and "," not in lexical:
            self.fail(f"geo literal needs 'lat,lon', got {lexical!r}")
        try:
            if kind == "text":
                return Literal.text(lexical)
            if kind == "integer":
                return Literal.integer(int(lexical))
            if kind == "dateTime":
                return Literal.date_time(parse_timestamp(lexical))
            if kind == "decimal":
                return Literal("decimal", Decimal(lexical))
            lat, _, lon = lexical.partition(",")
            return Literal("geo", (Decimal(lat), Decimal(lon)))
        except (ValueError, InvalidOperation, ParseError, ValidationError):
            raise ParseError(f"bad {kind} literal {lexical!r}", line=self.line_no) from None

    def expect_end(self):
        self.skip_ws()
        if self.peek() != ".":
            self.fail("expected terminating '.'")
        self.pos += 1
        self.skip_ws()
        if self.pos != len(self.text):
            self.fail("trailing characters after '.'")


def parse_triple_line(line: str, line_no: int = 1) -> Triple:
    scanner = _LineScanner(line, line_no)
    scanner.skip_ws()
    subject = scanner.read_iri()
    scanner.skip_ws()
    predicate = scanner.read_iri()
    scanner.skip_ws()
    obj = scanner.read_object()
    scanner.expect_end()
    return Triple(subject, predicate, obj)


# --- the store ----------------------------------------------------------------


class KnowledgeBase:
    """In-memory triple set with three hash indexes and a single-writer lock.

    Reads take the lock only long enough to snapshot candidates; all
    mutations (including multi-triple batches) are atomic under the lock.
    """

    def __init__(self, vocabulary: Vocabulary | None = None):
        self.vocabulary = vocabulary if vocabulary is not None else cbiont_vocabulary()
        self._triples: set[Triple] = set()
        self._by_subject: dict[IRI, set[Triple]] = {}
        self._by_predicate: dict[IRI, set[Triple]] = {}
        self._by_object: dict[Term, set[Triple]] = {}
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self._triples

    def triples(self) -> frozenset:
        with self._lock:
            return frozenset(self._triples)

    def _index_add(self, t: Triple):
        self._by_subject.setdefault(t.subject, set()).add(t)
        self._by_predicate.setdefault(t.predicate, set()).add(t)
        self._by_object.setdefault(t.object, set()).add(t)

    def _index_remove(self, t: Triple):
        for index, key in ((self._by_subject, t.subject),
                           (self._by_predicate, t.predicate),
                           (self._by_object, t.object)):
            bucket = index.get(key)
            if bucket is not None:
                bucket.discard(t)
                if not bucket:
                    del index[key]

    def assert_triple(self, t: Triple) -> bool:
        """Add the triple; returns False when it was already present."""
        if not isinstance(t, Triple):
            raise ValidationError("assert_triple takes a Triple")
        with self._lock:
            if t in self._triples:
                return False
            self._triples.add(t)
            self._index_add(t)
            return True

    def retract_triple(self, t: Triple) -> bool:
        """Remove the triple; returns False when it was absent (no-op)."""
        with self._lock:
            if t not in self._triples:
                return False
            self._triples.remove(t)
            self._index_remove(t)
            return True

    def apply_batch(self, assertions: Iterable[Triple] = (),
                    retractions: Iterable[Triple] = ()):
        """One atomic mutation: retractions first, then assertions."""
        with self._lock:
            for t in retractions:
                self.retract_triple(t)
            for t in assertions:
                self.assert_triple(t)

    def match(self, subject: IRI | None = None, predicate: IRI | None = None,
              obj: Term | None = None) -> list[Triple]:
        """Triples matching every bound position, ordered lexicographically
        by the rendered subject, predicate, object."""
        with self._lock:
            candidate_sets = []
            if subject is not None:
                candidate_sets.append(self._by_subject.get(subject, set()))
            if predicate is not None:
                candidate_sets.append(self._by_predicate.get(predicate, set()))
            if obj is not None:
                candidate_sets.append(self._by_object.get(obj, set()))
            if candidate_sets:
                pool = set(min(candidate_sets, key=len))
            else:
                pool = set(self._triples)
        out = [t for t in pool
               if (subject is None or t.subject == subject)
               and (predicate is None or t.predicate == predicate)
               and (obj is None or t.object == obj)]
        out.sort(key=lambda t: (render_term(t.subject), render_term(t.predicate),
                                render_term(t.object)))
        return out

    def instances_of(self, cls: IRI, transitive: bool = False) -> list[IRI]:
        """Subjects typed as the class (or, transitively, any subclass),
        deduplicated and ordered by IRI value."""
        if not self.vocabulary.is_class(cls):
            raise NotFoundError(f"unknown class {cls.value}")
        wanted = self.vocabulary.subclass_closure(cls) if transitive else {cls}
        found = set()
        for c in wanted:
            for t in self.match(predicate=TYPE, obj=c):
                found.add(t.subject)
        return sorted(found, key=lambda iri: iri.value)


# --- serialization and persistence ---------------------------------------------


def serialize_kb(kb: KnowledgeBase) -> str:
    """Deterministic dump: one triple per line, sorted."""
    lines = sorted(render_triple(t) for t in kb.triples())
    return "".join(line + "\n" for line in lines)


def parse_kb(text: str, vocabulary: Vocabulary | None = None) -> KnowledgeBase:
    """Parse the line format; blank lines and #-comment lines are skipped.
    Errors carry 1-based line numbers."""
    kb = KnowledgeBase(vocabulary)
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        kb.assert_triple(parse_triple_line(line, line_no))
    return kb


def save_kb(kb: KnowledgeBase, path: str | Path):
    """Write-temp-then-rename so the file is never observed half-written."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    data = serialize_kb(kb).encode("utf-8")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_kb(path: str | Path, vocabulary: Vocabulary | None = None) -> KnowledgeBase:
    path = Path(path)
    if not path.exists():
        return KnowledgeBase(vocabulary)
    return parse_kb(path.read_text("utf-8"), vocabulary)


# --- instance identifiers -------------------------------------------------------

_MINTED = re.compile(r"^urn:cbi:([a-z]+):([0-9]+)$")


class IriMinter:
    """Mints `urn:cbi:{kind}:{n}` identifiers with per-kind monotonic
    counters; `observe` advances counters past identifiers loaded from disk
    so restarts never re-issue an id."""

    def __init__(self):
        self._counters: dict[str, int] = {}
        self._lock = threading.Lock()

    def mint(self, kind: str) -> IRI:
        if not re.fullmatch(r"[a-z]+", kind):
            raise ValidationError(f"minted kind must be lowercase letters, got {kind!r}")
        with self._lock:
            n = self._counters.get(kind, 0) + 1
            self._counters[kind] = n
            return IRI(f"urn:cbi:{kind}:{n}")

    def observe(self, iri: IRI):
        m = _MINTED.match(iri.value)
        if m:
            kind, n = m.group(1), int(m.group(2))
            with self._lock:
                self._counters[kind] = max(self._counters.get(kind, 0), n)

    def observe_kb(self, kb: KnowledgeBase):
        for t in kb.triples():
            self.observe(t.subject)
            if isinstance(t.object, IRI):
                self.observe(t.object)
