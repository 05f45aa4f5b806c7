"""The assembled platform: dataset, cube registry, triple store, sessions,
annotations, and dashboard behind one facade.

All state lives in a single data directory (pipe-delimited table files,
`cbiont.nt`, `dashboard.json`, optional `*.cube.json` documents). Every
mutating call persists before it returns, so a restart always comes back
to the last completed write. Mutations are serialized through one lock;
reads take consistent snapshots.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from datetime import datetime, timezone
from pathlib import Path

from .annotations import (
    ANNOTATION_KINDS,
    AnnotationManager,
    AnnotationView,
    CubeTarget,
    DashboardItemTarget,
    QueryTarget,
    Target,
)
from .cube import CubeSchema, cube_to_dict, default_cube_document, parse_cube, validate_cube
from .dashboard import (
    DASHBOARD_FILENAME,
    DashboardItem,
    check_chart_constraint,
    load_dashboard,
    save_dashboard,
    validate_export_document,
)
from .engine import Query, ResultTable, canonical_query_json, execute, query_from_dict
from .errors import CollabBIError, NotFoundError, SchemaError, ValidationError
from .kb import IRI, IriMinter, format_timestamp, load_kb, parse_timestamp, save_kb
from .sessions import CollabSession, SessionHandler, UserProfile, VirtualLocation
from .ssb import SCHEMAS, Dataset, GeneratorConfig, generate_dataset, load_csv, write_csv

KB_FILENAME = "cbiont.nt"
TABLE_SUFFIX = ".tbl"


# ---------------------------------------------------------------------------
# data directory layout

def dataset_paths(data_dir: str | os.PathLike) -> dict[str, Path]:
    base = Path(data_dir)
    return {name: base / f"{name}{TABLE_SUFFIX}" for name in sorted(SCHEMAS)}


def save_dataset(dataset: Dataset, data_dir: str | os.PathLike) -> list[Path]:
    """One pipe-delimited file per table, each written via temp + rename."""
    written = []
    for name, path in dataset_paths(data_dir).items():
        table = dataset.table(name)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{name}-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                write_csv(table, handle)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        written.append(path)
    return written


def load_dataset(data_dir: str | os.PathLike) -> Dataset | None:
    """Load all five tables, or None when the directory holds none of them.
    A partial set is an error, not a silent regeneration."""
    paths = dataset_paths(data_dir)
    present = {name: p for name, p in paths.items() if p.exists()}
    if not present:
        return None
    missing = sorted(set(paths) - set(present))
    if missing:
        raise ValidationError(
            f"dataset in {os.fspath(data_dir)} is incomplete, missing tables {missing}")
    tables = []
    for name, path in present.items():
        with open(path, encoding="utf-8", newline="") as handle:
            tables.append(load_csv(SCHEMAS[name], handle))
    return Dataset.from_tables(tables)


def load_cubes(data_dir: str | os.PathLike) -> dict[str, CubeSchema]:
    """Cube documents from `*.cube.json` in the data directory; the packaged
    Lineorder cube when there are none."""
    documents = sorted(Path(data_dir).glob("*.cube.json"))
    if documents:
        schemas = [parse_cube(p.read_text(encoding="utf-8")) for p in documents]
    else:
        schemas = [parse_cube(default_cube_document())]
    out: dict[str, CubeSchema] = {}
    for schema in schemas:
        if schema.name in out:
            raise SchemaError(f"two cube documents both define {schema.name!r}")
        out[schema.name] = schema
    return out


# ---------------------------------------------------------------------------
# annotation target wire format

def target_to_json(target: Target) -> dict:
    if isinstance(target, CubeTarget):
        return {"kind": "cube", "cube": target.cube}
    if isinstance(target, DashboardItemTarget):
        return {"kind": "dashboardItem", "itemId": target.item_id.value}
    if isinstance(target, QueryTarget):
        return {"kind": "query", "query": json.loads(target.canonical)}
    raise ValidationError(f"unknown annotation target {target!r}")


def target_from_json(doc: object) -> Target:
    if not isinstance(doc, dict):
        raise ValidationError("annotation target must be an object")
    kind = doc.get("kind")
    if kind == "cube":
        cube = doc.get("cube")
        if not isinstance(cube, str):
            raise ValidationError("cube target needs a cube name")
        return CubeTarget(cube)
    if kind == "dashboardItem":
        item_id = doc.get("itemId")
        if not isinstance(item_id, str):
            raise ValidationError("dashboardItem target needs an itemId")
        return DashboardItemTarget(IRI(item_id))
    if kind == "query":
        return QueryTarget(canonical_query_json(query_from_dict(doc.get("query"))))
    raise ValidationError(f"annotation target kind must be cube, dashboardItem or query, got {kind!r}")


_SLUG_RE = re.compile(r"[^a-z0-9]+")


class CollabPlatform:
    """Everything the HTTP service and the CLI need, in one object."""

    def __init__(self, data_dir: str | os.PathLike,
                 clock=None, generator: GeneratorConfig | None = None):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.clock = clock or (lambda: datetime.now(timezone.utc))
        self._lock = threading.RLock()

        generator = generator or GeneratorConfig()
        dataset = load_dataset(self.data_dir)
        if dataset is None:
            dataset = generate_dataset(
                seed=generator.seed, fact_rows=generator.fact_rows,
                customers=generator.customers, suppliers=generator.suppliers,
                parts=generator.parts)
            save_dataset(dataset, self.data_dir)
        self.dataset = dataset

        self.cubes = load_cubes(self.data_dir)
        for schema in self.cubes.values():
            problems = [d for d in validate_cube(schema, dataset) if d.severity == "error"]
            if problems:
                first = problems[0]
                raise SchemaError(
                    f"cube {schema.name} does not fit the dataset: "
                    f"{first.member}: {first.message}")

        self.kb_path = self.data_dir / KB_FILENAME
        self.kb = load_kb(self.kb_path)
        self.minter = IriMinter()
        self.minter.observe_kb(self.kb)
        self.sessions = SessionHandler(self.kb, self.minter)
        self.annotations = AnnotationManager(self.kb, self.minter, self.sessions, self.clock)
        self.dashboard_path = self.data_dir / DASHBOARD_FILENAME
        self.dashboard = load_dashboard(
            self.dashboard_path, self.run_query_object, self.minter, self.clock)
        for item in self.dashboard.list_items():
            self.minter.observe(item.item_id)

    # -- queries ------------------------------------------------------------

    def cube_schema(self, name: str) -> CubeSchema:
        try:
            return self.cubes[name]
        except KeyError:
            raise NotFoundError(f"no cube named {name!r}") from None

    def cube_documents(self) -> list[dict]:
        return [cube_to_dict(self.cubes[name]) for name in sorted(self.cubes)]

    def cube_members(self, name: str) -> dict:
        schema = self.cube_schema(name)
        measures = []
        for m in schema.measures:
            entry: dict = {"name": m.name, "kind": m.kind}
            if m.source_column is not None:
                entry["column"] = m.source_column
            if m.format != "none":
                entry["format"] = m.format
            if m.drill_members:
                entry["drillMembers"] = list(m.drill_members)
            measures.append(entry)
        dimensions = [{"name": d.name, "kind": d.kind} for d in schema.dimensions]
        return {"cube": schema.name, "measures": measures, "dimensions": dimensions}

    def run_query_object(self, query: Query) -> ResultTable:
        return execute(query, self.cube_schema(query.cube), self.dataset)

    def run_query(self, doc: dict) -> ResultTable:
        return self.run_query_object(query_from_dict(doc))

    # -- sessions -----------------------------------------------------------

    def open_session(self, profiles, location) -> CollabSession:
        with self._lock:
            session = self.sessions.open_session(profiles, location, self.clock())
            self.checkpoint()
            return self.sessions.session_info(session)

    def close_session(self, session: IRI) -> CollabSession:
        with self._lock:
            info = self.sessions.close_session(session, self.clock())
            self.checkpoint()
            return info

    def session_info(self, session: IRI) -> CollabSession:
        return self.sessions.session_info(session)

    # -- annotations ----------------------------------------------------------

    def _check_target(self, target: Target) -> None:
        # annotations must point at something the service actually has
        if isinstance(target, CubeTarget):
            self.cube_schema(target.cube)
        elif isinstance(target, DashboardItemTarget):
            self.dashboard.get_item(target.item_id)

    def add_annotation(self, session: IRI, author: IRI, target: Target, kind: str,
                       body: str, in_reply_to: IRI | None = None) -> AnnotationView:
        with self._lock:
            self._check_target(target)
            annotation = self.annotations.add_annotation(
                session, author, target, kind, body, in_reply_to)
            if isinstance(target, DashboardItemTarget):
                self.dashboard.add_comment_ref(target.item_id, annotation)
            self.checkpoint()
            return self.annotations.get_annotation(annotation)

    def get_annotation(self, annotation_id: IRI) -> AnnotationView:
        return self.annotations.get_annotation(annotation_id)

    def edit_annotation(self, annotation_id: IRI, new_body: str, editor: IRI) -> AnnotationView:
        with self._lock:
            view = self.annotations.edit_annotation(annotation_id, new_body, editor)
            self.checkpoint()
            return view

    def delete_annotation(self, annotation_id: IRI, requester: IRI) -> int:
        with self._lock:
            view = self.annotations.get_annotation(annotation_id)
            count = self.annotations.delete_annotation(annotation_id, requester)
            if isinstance(view.target, DashboardItemTarget):
                try:
                    self.dashboard.remove_comment_ref(view.target.item_id, annotation_id)
                except NotFoundError:
                    pass  # item already deleted; the ref went with it
            self.checkpoint()
            return count

    def enlist_annotations(self, target: Target, session: IRI | None = None) -> list[AnnotationView]:
        return self.annotations.enlist_annotations(target, session)

    # -- dashboard ------------------------------------------------------------

    def list_dashboard_items(self) -> tuple[DashboardItem, ...]:
        return self.dashboard.list_items()

    def get_dashboard_item(self, item_id: IRI) -> DashboardItem:
        return self.dashboard.get_item(item_id)

    def add_dashboard_item(self, query: Query, chart_type: str, title: str,
                           description: str | None = None) -> DashboardItem:
        with self._lock:
            item_id = self.dashboard.add_item(query, chart_type, title, description)
            self.checkpoint()
            return self.dashboard.get_item(item_id)

    def update_dashboard_item(self, item_id: IRI, new_query: Query | None = None,
                              new_chart_type: str | None = None,
                              new_title: str | None = None) -> DashboardItem:
        with self._lock:
            item = self.dashboard.update_item(item_id, new_query, new_chart_type, new_title)
            self.checkpoint()
            return item

    def delete_dashboard_item(self, item_id: IRI) -> DashboardItem:
        # the item's annotations stay in the store as history
        with self._lock:
            removed = self.dashboard.delete_item(item_id)
            self.checkpoint()
            return removed

    # -- export / import --------------------------------------------------

    def _resolve_item_comments(self, item: DashboardItem) -> list[dict]:
        views = self.annotations.enlist_annotations(DashboardItemTarget(item.item_id))
        index_of = {v.annotation_id: i for i, v in enumerate(views)}
        comments = []
        for view in views:
            entry: dict = {
                "kind": view.kind,
                "body": view.body,
                "authorName": self.sessions.person_name(view.author),
                "createdAt": format_timestamp(view.created_at),
            }
            if view.in_reply_to is not None and view.in_reply_to in index_of:
                entry["replyTo"] = index_of[view.in_reply_to]
            comments.append(entry)
        return comments

    def export_document(self) -> dict:
        with self._lock:
            return self.dashboard.export_document(self._resolve_item_comments,
                                                  exported_at=self.clock())

    def _import_profiles(self, names: list[str]) -> dict[str, UserProfile]:
        """Synthetic profiles for export authors: names travel in the file,
        mailboxes do not, so each distinct name gets a stable stand-in."""
        taken: dict[str, str] = {}
        out: dict[str, UserProfile] = {}
        for name in names:
            base = _SLUG_RE.sub(".", name.lower()).strip(".") or "collaborator"
            slug, n = base, 2
            while slug in taken and taken[slug] != name:
                slug, n = f"{base}.{n}", n + 1
            taken[slug] = name
            out[name] = UserProfile(display_name=name, mbox=f"{slug}@import.invalid")
        return out

    def import_document(self, doc: dict) -> list[IRI]:
        """Recreate the exported items and their comment threads. Everything
        is validated before the first write, so a rejected import leaves no
        trace; accepted items are appended after any existing ones."""
        with self._lock:
            entries = validate_export_document(doc)
            plans = []
            for index, entry in enumerate(entries):
                where = f"export item {index}"
                metadata = entry["metadata"]
                if not metadata["title"].strip():
                    raise ValidationError(f"{where}: title must be non-empty")
                try:
                    query = query_from_dict(entry["queryDocument"])
                    check_chart_constraint(query, metadata["chartType"])
                    self.run_query_object(query)
                except ValidationError as exc:
                    raise ValidationError(f"{where}: {exc}") from None
                except CollabBIError as exc:
                    raise ValidationError(f"{where}: query rejected: {exc}") from None

                raw_comments = entry.get("comments", [])
                comments = []
                for c_index, raw in enumerate(raw_comments):
                    c_where = f"{where}, comment {c_index}"
                    kind = raw["kind"]
                    if kind not in ANNOTATION_KINDS:
                        raise ValidationError(f"{c_where}: unknown kind {kind!r}")
                    if not raw["authorName"].strip():
                        raise ValidationError(f"{c_where}: authorName must be non-empty")
                    if not raw["body"].strip():
                        raise ValidationError(f"{c_where}: body must be non-empty")
                    try:
                        created = parse_timestamp(raw["createdAt"])
                    except ValidationError as exc:
                        raise ValidationError(f"{c_where}: {exc}") from None
                    reply_to = raw.get("replyTo")
                    if reply_to is not None:
                        if kind != "answer":
                            raise ValidationError(f"{c_where}: only answers carry replyTo")
                        if raw_comments[reply_to]["kind"] != "question":
                            raise ValidationError(f"{c_where}: replyTo must point at a question")
                    comments.append((kind, raw["body"], raw["authorName"], created, reply_to))
                plans.append((query, metadata["chartType"], metadata["title"],
                              metadata.get("description"), comments))

            author_names: list[str] = []
            for _, _, _, _, comments in plans:
                for _, _, name, _, _ in comments:
                    if name not in author_names:
                        author_names.append(name)

            session = None
            person_of: dict[str, IRI] = {}
            if author_names:
                profiles = self._import_profiles(author_names)
                session = self.sessions.open_session(
                    list(profiles.values()), VirtualLocation("imported"), self.clock())
                person_of = {
                    name: self.sessions.find_person(profile.mbox)
                    for name, profile in profiles.items()
                }

            new_ids = []
            for query, chart_type, title, description, comments in plans:
                item_id = self.dashboard.add_item(query, chart_type, title, description)
                new_ids.append(item_id)
                target = DashboardItemTarget(item_id)
                created_ids: dict[int, IRI] = {}
                # two passes: replies may point forward in the exported
                # thread order, so their targets must exist first
                for replies_pass in (False, True):
                    for slot, (kind, body, author_name, created, reply_to) in enumerate(comments):
                        if (reply_to is not None) != replies_pass:
                            continue
                        kwargs: dict = {}
                        if kind == "answer":
                            if reply_to is None:
                                kwargs["reply_lost"] = True
                            else:
                                kwargs["in_reply_to"] = created_ids[reply_to]
                        annotation = self.annotations.add_annotation(
                            session, person_of[author_name], target, kind, body,
                            created_at=created, **kwargs)
                        created_ids[slot] = annotation
                        self.dashboard.add_comment_ref(item_id, annotation)
            if session is not None:
                self.sessions.close_session(session, self.clock())
            self.checkpoint()
            return new_ids

    # -- persistence --------------------------------------------------------

    def checkpoint(self) -> None:
        with self._lock:
            save_kb(self.kb, self.kb_path)
            save_dashboard(self.dashboard, self.dashboard_path)
