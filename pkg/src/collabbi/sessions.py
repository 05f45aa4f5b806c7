"""Collaborative session lifecycle.

Opening a session registers any previously unseen participant profiles and
records the session's participants, time interval, and physical or virtual
location as triples. Closing stamps the interval end; a closed session stops
accepting new annotations.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from decimal import Decimal
from typing import Union

from . import kb as k
from .errors import NotFoundError, StateError, ValidationError
from .kb import IRI, IriMinter, KnowledgeBase, Literal, Triple, format_timestamp


@dataclass(frozen=True)
class UserProfile:
    display_name: str
    mbox: str
    user_id: IRI | None = None
    organization: str | None = None
    knows: tuple = ()

    def __post_init__(self):
        if not self.display_name:
            raise ValidationError("displayName must be non-empty")
        if not isinstance(self.mbox, str) or self.mbox.count("@") != 1:
            raise ValidationError(f"mbox must contain exactly one '@': {self.mbox!r}")


@dataclass(frozen=True)
class PhysicalLocation:
    name: str
    latitude: float
    longitude: float

    def __post_init__(self):
        if not self.name:
            raise ValidationError("place name must be non-empty")
        if not -90 <= self.latitude <= 90:
            raise ValidationError(f"latitude out of range [-90, 90]: {self.latitude}")
        if not -180 <= self.longitude <= 180:
            raise ValidationError(f"longitude out of range [-180, 180]: {self.longitude}")


@dataclass(frozen=True)
class VirtualLocation:
    label: str

    def __post_init__(self):
        if not self.label:
            raise ValidationError("virtual location label must be non-empty")


Location = Union[PhysicalLocation, VirtualLocation]


@dataclass(frozen=True)
class CollabSession:
    session_id: IRI
    participants: tuple
    start: datetime
    end: datetime | None
    location: Location

    @property
    def closed(self) -> bool:
        return self.end is not None


class SessionHandler:
    def __init__(self, kb: KnowledgeBase, minter: IriMinter):
        self.kb = kb
        self.minter = minter

    # -- profile registry ------------------------------------------------

    def find_person(self, mbox: str) -> IRI | None:
        hits = self.kb.match(predicate=k.MBOX, obj=Literal.text(mbox))
        return hits[0].subject if hits else None

    def register_profile(self, profile: UserProfile) -> IRI:
        """Idempotent: a person already known by id or mbox is reused, not
        re-described."""
        existing = self.find_person(profile.mbox)
        if profile.user_id is not None and existing is not None and existing != profile.user_id:
            raise ValidationError(
                f"mbox {profile.mbox!r} is already registered to {existing.value}")
        person = profile.user_id if profile.user_id is not None else existing
        if person is None:
            person = self.minter.mint("person")
        elif existing == person:
            return person
        triples = [
            Triple(person, k.TYPE, k.PERSON),
            Triple(person, k.NAME, Literal.text(profile.display_name)),
            Triple(person, k.MBOX, Literal.text(profile.mbox)),
        ]
        if profile.organization:
            triples.append(Triple(person, k.ORGANIZATION, Literal.text(profile.organization)))
        for friend in profile.knows:
            triples.append(Triple(person, k.KNOWS, friend))
        self.kb.apply_batch(assertions=triples)
        return person

    def person_name(self, person: IRI) -> str:
        hits = self.kb.match(subject=person, predicate=k.NAME)
        if not hits:
            raise NotFoundError(f"no profile for {person.value}")
        return hits[0].object.value

    # -- lifecycle ---------------------------------------------------------

    def open_session(self, profiles: list, location: Location, start: datetime) -> IRI:
        if not profiles:
            raise ValidationError("a session needs at least one participant")
        if not isinstance(location, (PhysicalLocation, VirtualLocation)):
            raise ValidationError("location must be physical or virtual")
        participants = [self.register_profile(p) for p in profiles]

        session = self.minter.mint("session")
        interval = self.minter.mint("interval")
        triples = [
            Triple(session, k.TYPE, k.COLLABORATIVE_SESSION),
            Triple(session, k.HAS_INTERVAL, interval),
            Triple(interval, k.TYPE, k.INTERVAL),
            Triple(interval, k.START, Literal.date_time(start)),
        ]
        for person in participants:
            triples.append(Triple(session, k.HAS_PARTICIPANT, person))
        if isinstance(location, VirtualLocation):
            triples.append(Triple(session, k.VIRTUAL_LOCATION, Literal.text(location.label)))
        else:
            place = self.minter.mint("place")
            triples += [
                Triple(session, k.LOCATED_IN, place),
                Triple(place, k.TYPE, k.PLACE),
                Triple(place, k.NAME, Literal.text(location.name)),
                Triple(place, k.LATITUDE, Literal.decimal(Decimal(str(location.latitude)))),
                Triple(place, k.LONGITUDE, Literal.decimal(Decimal(str(location.longitude)))),
            ]
        self.kb.apply_batch(assertions=triples)
        return session

    def _interval_of(self, session: IRI) -> IRI:
        if not self.kb.match(subject=session, predicate=k.TYPE, obj=k.COLLABORATIVE_SESSION):
            raise NotFoundError(f"unknown session {session.value}")
        return self.kb.match(subject=session, predicate=k.HAS_INTERVAL)[0].object

    def close_session(self, session: IRI, end: datetime) -> CollabSession:
        interval = self._interval_of(session)
        if self.kb.match(subject=interval, predicate=k.END):
            raise StateError(f"session {session.value} is already closed")
        start = self.kb.match(subject=interval, predicate=k.START)[0].object.value
        end_literal = Literal.date_time(end)
        if end_literal.value < start:
            raise ValidationError(
                f"session end {end_literal.lexical()} precedes start {format_timestamp(start)}")
        self.kb.apply_batch(assertions=[Triple(interval, k.END, end_literal)])
        return self.session_info(session)

    def session_info(self, session: IRI) -> CollabSession:
        interval = self._interval_of(session)
        start = self.kb.match(subject=interval, predicate=k.START)[0].object.value
        end_hits = self.kb.match(subject=interval, predicate=k.END)
        end = end_hits[0].object.value if end_hits else None
        participants = tuple(
            t.object for t in self.kb.match(subject=session, predicate=k.HAS_PARTICIPANT))

        virtual = self.kb.match(subject=session, predicate=k.VIRTUAL_LOCATION)
        if virtual:
            location: Location = VirtualLocation(virtual[0].object.value)
        else:
            place = self.kb.match(subject=session, predicate=k.LOCATED_IN)[0].object
            name = self.kb.match(subject=place, predicate=k.NAME)[0].object.value
            lat = self.kb.match(subject=place, predicate=k.LATITUDE)[0].object.value
            lon = self.kb.match(subject=place, predicate=k.LONGITUDE)[0].object.value
            location = PhysicalLocation(name, float(lat), float(lon))

        return CollabSession(session_id=session, participants=participants,
                             start=start, end=end, location=location)

    def is_open(self, session: IRI) -> bool:
        interval = self._interval_of(session)
        return not self.kb.match(subject=interval, predicate=k.END)

    def participants(self, session: IRI) -> frozenset:
        self._interval_of(session)  # existence check
        return frozenset(
            t.object for t in self.kb.match(subject=session, predicate=k.HAS_PARTICIPANT))
