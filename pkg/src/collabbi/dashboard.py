"""Dashboard: saved analyses, each a query plus chart type plus comments.

Items live in position order (1..n, renumbered on delete). Every mutation
that changes an item's query or chart type re-executes the candidate query
through an injected runner before anything is stored, so the dashboard
never holds a query the engine would reject. Export assembles a portable
JSON document; persistence is a single atomically written JSON file.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from typing import Callable

from .engine import Query, query_from_dict, query_to_dict
from .errors import (
    ChartConstraintError,
    CollabBIError,
    NotFoundError,
    UnsupportedVersionError,
    ValidationError,
)
from .kb import IRI, IriMinter, format_timestamp, parse_timestamp

CHART_TYPES = ("table", "pie", "bar", "line")

FORMAT_VERSION = 1

DASHBOARD_FILENAME = "dashboard.json"


@dataclass(frozen=True)
class DashboardItem:
    item_id: IRI
    title: str
    chart_type: str
    query: Query
    created_at: datetime
    modified_at: datetime
    position: int
    description: str | None = None
    comment_refs: tuple[IRI, ...] = ()


def check_chart_constraint(query: Query, chart_type: str) -> None:
    if chart_type not in CHART_TYPES:
        raise ValidationError(f"chartType must be one of {CHART_TYPES}, got {chart_type!r}")
    if chart_type != "pie":
        return
    # a pie has one slice axis and one value per slice, nothing else
    if len(query.measures) != 1 or len(query.dimensions) != 1:
        raise ChartConstraintError(
            f"a pie chart needs exactly 1 measure and 1 dimension, got "
            f"{len(query.measures)} and {len(query.dimensions)}")
    if query.time_dimension is not None:
        raise ChartConstraintError("a pie chart cannot carry a time bucket axis")


def render_query_text(query: Query) -> str:
    """Stable, human-readable block rendering of a query. Same query in,
    same text out; sections appear only when populated."""
    lines = [f"cube {query.cube} {{"]
    if query.measures:
        lines.append("  measures { " + " ".join(query.measures) + " }")
    if query.dimensions:
        lines.append("  dimensions { " + " ".join(query.dimensions) + " }")
    if query.filters:
        lines.append("  filters {")
        for f in query.filters:
            lines.append(f"    {f.member} {f.operator} {json.dumps(list(f.values))}")
        lines.append("  }")
    if query.time_dimension is not None:
        td = query.time_dimension
        piece = f"  timeDimension {{ {td.member} granularity: {td.granularity}"
        if td.date_range is not None:
            piece += f" range: {json.dumps(list(td.date_range))}"
        lines.append(piece + " }")
    if query.order_by:
        rendered = ", ".join(f"{col}: {direction}" for col, direction in query.order_by)
        lines.append("  orderBy { " + rendered + " }")
    if query.limit is not None:
        lines.append(f"  limit {query.limit}")
    lines.append("}")
    return "\n".join(lines)


class Dashboard:
    """Ordered store of dashboard items.

    `runner` executes a query against the live cube and raises on anything
    the engine rejects; `minter` issues item identifiers; `clock` stamps
    created/modified times (UTC).
    """

    def __init__(self, runner: Callable[[Query], object], minter: IriMinter,
                 clock: Callable[[], datetime] | None = None):
        self._runner = runner
        self._minter = minter
        self._clock = clock or (lambda: datetime.now(timezone.utc))
        self._items: list[DashboardItem] = []

    def __len__(self) -> int:
        return len(self._items)

    def _validate(self, query: Query, chart_type: str) -> None:
        check_chart_constraint(query, chart_type)
        try:
            self._runner(query)
        except ValidationError:
            raise
        except CollabBIError as exc:
            raise ValidationError(f"query rejected: {exc}") from exc

    def add_item(self, query: Query, chart_type: str, title: str,
                 description: str | None = None) -> IRI:
        if not isinstance(title, str) or not title.strip():
            raise ValidationError("item title must be non-empty")
        self._validate(query, chart_type)
        stamp = self._clock()
        item = DashboardItem(
            item_id=self._minter.mint("item"),
            title=title,
            chart_type=chart_type,
            query=query,
            created_at=stamp,
            modified_at=stamp,
            position=len(self._items) + 1,
            description=description,
        )
        self._items.append(item)
        return item.item_id

    def _index_of(self, item_id: IRI) -> int:
        for i, item in enumerate(self._items):
            if item.item_id == item_id:
                return i
        raise NotFoundError(f"no dashboard item {item_id.value}")

    def get_item(self, item_id: IRI) -> DashboardItem:
        return self._items[self._index_of(item_id)]

    def list_items(self) -> tuple[DashboardItem, ...]:
        return tuple(self._items)

    def update_item(self, item_id: IRI, new_query: Query | None = None,
                    new_chart_type: str | None = None,
                    new_title: str | None = None) -> DashboardItem:
        """Replace the given fields; everything else (position, comments,
        createdAt) is preserved. Nothing is stored unless the resulting
        query/chart combination validates."""
        i = self._index_of(item_id)
        current = self._items[i]
        if new_title is not None and not new_title.strip():
            raise ValidationError("item title must be non-empty")
        query = new_query if new_query is not None else current.query
        chart_type = new_chart_type if new_chart_type is not None else current.chart_type
        if new_query is not None or new_chart_type is not None:
            self._validate(query, chart_type)
        bumped = max(self._clock(), current.modified_at + timedelta(seconds=1))
        updated = replace(
            current,
            title=new_title if new_title is not None else current.title,
            chart_type=chart_type,
            query=query,
            modified_at=bumped,
        )
        self._items[i] = updated
        return updated

    def delete_item(self, item_id: IRI) -> DashboardItem:
        """Remove the item and close the position gap. The item's
        annotations stay in the knowledge base; only the dashboard entry
        goes away."""
        i = self._index_of(item_id)
        removed = self._items.pop(i)
        for j in range(i, len(self._items)):
            self._items[j] = replace(self._items[j], position=j + 1)
        return removed

    def add_comment_ref(self, item_id: IRI, annotation_id: IRI) -> None:
        i = self._index_of(item_id)
        item = self._items[i]
        if annotation_id in item.comment_refs:
            return
        self._items[i] = replace(item, comment_refs=item.comment_refs + (annotation_id,))

    def remove_comment_ref(self, item_id: IRI, annotation_id: IRI) -> None:
        i = self._index_of(item_id)
        item = self._items[i]
        if annotation_id not in item.comment_refs:
            return
        kept = tuple(ref for ref in item.comment_refs if ref != annotation_id)
        self._items[i] = replace(item, comment_refs=kept)

    def export_document(self,
                        resolve_comments: Callable[[DashboardItem], list[dict]] | None = None,
                        exported_at: datetime | None = None) -> dict:
        """Assemble the portable export document: one entry per item in
        position order. `resolve_comments` turns an item's comment refs
        into the embedded comment objects (default: none)."""
        resolve = resolve_comments or (lambda item: [])
        stamp = exported_at if exported_at is not None else self._clock()
        return {
            "formatVersion": FORMAT_VERSION,
            "exportedAt": format_timestamp(stamp),
            "items": [
                {
                    "queryDocument": query_to_dict(item.query),
                    "queryText": render_query_text(item.query),
                    "metadata": {
                        "title": item.title,
                        "description": item.description,
                        "chartType": item.chart_type,
                    },
                    "comments": resolve(item),
                }
                for item in self._items
            ],
        }


# ---------------------------------------------------------------------------
# persistence

def _item_to_document(item: DashboardItem) -> dict:
    return {
        "itemId": item.item_id.value,
        "title": item.title,
        "description": item.description,
        "chartType": item.chart_type,
        "query": query_to_dict(item.query),
        "commentRefs": [ref.value for ref in item.comment_refs],
        "createdAt": format_timestamp(item.created_at),
        "modifiedAt": format_timestamp(item.modified_at),
        "position": item.position,
    }


def _item_from_document(doc: dict) -> DashboardItem:
    if not isinstance(doc, dict):
        raise ValidationError("dashboard item entries must be objects")
    try:
        return DashboardItem(
            item_id=IRI(doc["itemId"]),
            title=doc["title"],
            chart_type=doc["chartType"],
            query=query_from_dict(doc["query"]),
            created_at=parse_timestamp(doc["createdAt"]),
            modified_at=parse_timestamp(doc["modifiedAt"]),
            position=doc["position"],
            description=doc.get("description"),
            comment_refs=tuple(IRI(v) for v in doc.get("commentRefs", [])),
        )
    except KeyError as exc:
        raise ValidationError(f"dashboard item entry is missing {exc}") from None


def dashboard_to_document(dashboard: Dashboard) -> dict:
    return {
        "formatVersion": FORMAT_VERSION,
        "items": [_item_to_document(item) for item in dashboard.list_items()],
    }


def dashboard_from_document(doc: dict, runner: Callable[[Query], object],
                            minter: IriMinter,
                            clock: Callable[[], datetime] | None = None) -> Dashboard:
    if not isinstance(doc, dict):
        raise ValidationError("dashboard document must be a JSON object")
    version = doc.get("formatVersion")
    if version != FORMAT_VERSION:
        if isinstance(version, int) and version > FORMAT_VERSION:
            raise UnsupportedVersionError(
                f"dashboard format version {version} is newer than supported ({FORMAT_VERSION})")
        raise ValidationError(f"dashboard document has no usable formatVersion: {version!r}")
    dashboard = Dashboard(runner, minter, clock)
    items = [_item_from_document(entry) for entry in doc.get("items", [])]
    items.sort(key=lambda item: item.position)
    for expected, item in enumerate(items, start=1):
        if item.position != expected:
            raise ValidationError(
                f"dashboard positions must be 1..n, found {item.position} at slot {expected}")
        check_chart_constraint(item.query, item.chart_type)
    dashboard._items = items
    return dashboard


def save_dashboard(dashboard: Dashboard, path: str | os.PathLike) -> None:
    """Write-to-temp, fsync, rename: readers never observe a torn file."""
    path = os.fspath(path)
    payload = json.dumps(dashboard_to_document(dashboard), indent=2, sort_keys=True)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dashboard-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(payload + "\n")
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_dashboard(path: str | os.PathLike, runner: Callable[[Query], object],
                   minter: IriMinter,
                   clock: Callable[[], datetime] | None = None) -> Dashboard:
    path = os.fspath(path)
    if not os.path.exists(path):
        return Dashboard(runner, minter, clock)
    with open(path, encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path} is not valid JSON: {exc}") from None
    return dashboard_from_document(doc, runner, minter, clock)


# ---------------------------------------------------------------------------
# export document validation (used on import and by the HTTP layer)

_COMMENT_KEYS = {"kind", "body", "authorName", "createdAt", "replyTo"}


def validate_export_document(doc: object) -> list[dict]:
    """Structural check of an export document. Returns the item entries;
    raises with the offending item index in the message. Query execution
    is the importer's job, not handled here."""
    if not isinstance(doc, dict):
        raise ValidationError("export document must be a JSON object")
    version = doc.get("formatVersion")
    if not isinstance(version, int):
        raise ValidationError(f"export document has no usable formatVersion: {version!r}")
    if version > FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"export format version {version} is newer than supported ({FORMAT_VERSION})")
    if version < 1:
        raise ValidationError(f"export format version must be >= 1, got {version}")
    items = doc.get("items")
    if not isinstance(items, list):
        raise ValidationError("export document needs an items list")
    for index, entry in enumerate(items):
        where = f"export item {index}"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where}: entries must be objects")
        if not isinstance(entry.get("queryDocument"), dict):
            raise ValidationError(f"{where}: missing queryDocument")
        metadata = entry.get("metadata")
        if not isinstance(metadata, dict) or not isinstance(metadata.get("title"), str):
            raise ValidationError(f"{where}: metadata needs at least a title")
        chart_type = metadata.get("chartType")
        if chart_type not in CHART_TYPES:
            raise ValidationError(f"{where}: unknown chartType {chart_type!r}")
        comments = entry.get("comments", [])
        if not isinstance(comments, list):
            raise ValidationError(f"{where}: comments must be a list")
        for c_index, comment in enumerate(comments):
            c_where = f"{where}, comment {c_index}"
            if not isinstance(comment, dict):
                raise ValidationError(f"{c_where}: comments must be objects")
            unknown = set(comment) - _COMMENT_KEYS
            if unknown:
                raise ValidationError(f"{c_where}: unknown keys {sorted(unknown)}")
            for key in ("kind", "body", "authorName", "createdAt"):
                if not isinstance(comment.get(key), str):
                    raise ValidationError(f"{c_where}: missing {key}")
            reply_to = comment.get("replyTo")
            if reply_to is not None:
                if not isinstance(reply_to, int) or isinstance(reply_to, bool) \
                        or not 0 <= reply_to < len(comments):
                    raise ValidationError(
                        f"{c_where}: replyTo must index a comment of the same item")
    return items
