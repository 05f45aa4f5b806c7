"""JSON-over-HTTP face of the platform. All routes live under /api; every
error maps onto one status: validation 400, missing/bad token 401, wrong
author 403, unknown entity 404, state conflicts 409, anything unexpected
500 with an opaque message. /api/health needs no token.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .annotations import AnnotationView
from .config import ServiceConfig
from .dashboard import DashboardItem, render_query_text
from .engine import query_from_dict, query_to_dict
from .errors import (
    AuthorizationError,
    CollabBIError,
    NotFoundError,
    StateError,
    TokenError,
    UnsupportedOperationError,
    ValidationError,
)
from .kb import IRI, format_timestamp
from .platform import CollabPlatform, target_from_json, target_to_json
from .sessions import CollabSession, PhysicalLocation, UserProfile, VirtualLocation


def status_for(exc: CollabBIError) -> int:
    if isinstance(exc, TokenError):
        return 401
    if isinstance(exc, AuthorizationError):
        return 403
    if isinstance(exc, NotFoundError):
        return 404
    if isinstance(exc, StateError):
        return 409
    if isinstance(exc, (ValidationError, UnsupportedOperationError)):
        return 400
    return 500


# ---------------------------------------------------------------------------
# JSON shapes

def session_to_json(info: CollabSession, platform: CollabPlatform) -> dict:
    if isinstance(info.location, VirtualLocation):
        location: dict = {"kind": "virtual", "label": info.location.label}
    else:
        location = {"kind": "physical", "name": info.location.name,
                    "latitude": info.location.latitude,
                    "longitude": info.location.longitude}
    return {
        "sessionId": info.session_id.value,
        "start": format_timestamp(info.start),
        "end": format_timestamp(info.end) if info.end is not None else None,
        "open": not info.closed,
        "location": location,
        "participants": [
            {"personId": p.value, "displayName": platform.sessions.person_name(p)}
            for p in info.participants
        ],
    }


def annotation_to_json(view: AnnotationView, platform: CollabPlatform) -> dict:
    return {
        "annotationId": view.annotation_id.value,
        "kind": view.kind,
        "body": view.body,
        "author": view.author.value,
        "authorName": platform.sessions.person_name(view.author),
        "sessionId": view.session.value,
        "target": target_to_json(view.target),
        "createdAt": format_timestamp(view.created_at),
        "modifiedAt": format_timestamp(view.modified_at),
        "inReplyTo": view.in_reply_to.value if view.in_reply_to is not None else None,
        "replyTargetDeleted": view.reply_target_deleted,
    }


def item_to_json(item: DashboardItem) -> dict:
    return {
        "itemId": item.item_id.value,
        "title": item.title,
        "description": item.description,
        "chartType": item.chart_type,
        "query": query_to_dict(item.query),
        "queryText": render_query_text(item.query),
        "commentRefs": [ref.value for ref in item.comment_refs],
        "createdAt": format_timestamp(item.created_at),
        "modifiedAt": format_timestamp(item.modified_at),
        "position": item.position,
    }


def profile_from_json(doc: object) -> UserProfile:
    if not isinstance(doc, dict):
        raise ValidationError("participant entries must be objects")
    unknown = set(doc) - {"displayName", "mbox", "organization", "knows"}
    if unknown:
        raise ValidationError(f"unknown participant keys {sorted(unknown)}")
    knows = doc.get("knows", [])
    if not isinstance(knows, list):
        raise ValidationError("knows must be a list of person IRIs")
    return UserProfile(
        display_name=doc.get("displayName", ""),
        mbox=doc.get("mbox", ""),
        organization=doc.get("organization"),
        knows=tuple(IRI(v) for v in knows),
    )


def location_from_json(doc: object):
    if not isinstance(doc, dict):
        raise ValidationError("location must be an object")
    kind = doc.get("kind")
    if kind == "virtual":
        label = doc.get("label")
        if not isinstance(label, str):
            raise ValidationError("virtual location needs a label")
        return VirtualLocation(label)
    if kind == "physical":
        name = doc.get("name")
        if not isinstance(name, str):
            raise ValidationError("physical location needs a name")
        for key in ("latitude", "longitude"):
            if not isinstance(doc.get(key), (int, float)) or isinstance(doc.get(key), bool):
                raise ValidationError(f"physical location needs a numeric {key}")
        return PhysicalLocation(name, float(doc["latitude"]), float(doc["longitude"]))
    raise ValidationError(f"location kind must be virtual or physical, got {kind!r}")


async def read_json(request: Request) -> dict:
    raw = await request.body()
    if not raw:
        raise ValidationError("request body must be a JSON object")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON body: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("request body must be a JSON object")
    return doc


def _require(doc: dict, key: str):
    if key not in doc:
        raise ValidationError(f"request body needs {key!r}")
    return doc[key]


def _timestamp_slug(stamp: str) -> str:
    return stamp.replace("-", "").replace(":", "")


# ---------------------------------------------------------------------------
# app assembly

def create_app(platform: CollabPlatform, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="collabbi", docs_url=None, redoc_url=None, openapi_url=None)

    @app.middleware("http")
    async def require_token(request: Request, call_next):
        if config.shared_token is not None and request.url.path != "/api/health":
            expected = f"Bearer {config.shared_token}"
            if request.headers.get("authorization") != expected:
                return JSONResponse(
                    {"error": "TokenError", "message": "missing or wrong bearer token"},
                    status_code=401)
        return await call_next(request)

    @app.exception_handler(CollabBIError)
    async def platform_error(request: Request, exc: CollabBIError):
        status = status_for(exc)
        message = str(exc) if status < 500 else "internal error"
        return JSONResponse({"error": type(exc).__name__, "message": message},
                            status_code=status)

    @app.exception_handler(RequestValidationError)
    async def request_shape_error(request: Request, exc: RequestValidationError):
        # keep framework-level shape errors on the same status as our own
        return JSONResponse({"error": "ValidationError",
                             "message": "malformed request"}, status_code=400)

    @app.exception_handler(Exception)
    async def unexpected_error(request: Request, exc: Exception):
        return JSONResponse({"error": "InternalError", "message": "internal error"},
                            status_code=500)

    # -- meta ---------------------------------------------------------------

    @app.get("/api/health")
    async def health():
        return {"status": "ok", "cubes": len(platform.cubes),
                "items": len(platform.dashboard)}

    @app.get("/api/meta/cubes")
    async def meta_cubes():
        return {"cubes": platform.cube_documents()}

    @app.get("/api/meta/cubes/{name}/members")
    async def meta_members(name: str):
        return platform.cube_members(name)

    # -- queries --------------------------------------------------------------

    @app.post("/api/query")
    async def run_query(request: Request):
        doc = await read_json(request)
        return platform.run_query(doc).to_dict()

    # -- sessions -------------------------------------------------------------

    @app.post("/api/sessions")
    async def open_session(request: Request):
        doc = await read_json(request)
        raw_participants = _require(doc, "participants")
        if not isinstance(raw_participants, list):
            raise ValidationError("participants must be a list")
        profiles = [profile_from_json(p) for p in raw_participants]
        location = location_from_json(_require(doc, "location"))
        info = platform.open_session(profiles, location)
        return session_to_json(info, platform)

    @app.get("/api/sessions/{sid}")
    async def session_info(sid: str):
        return session_to_json(platform.session_info(IRI(sid)), platform)

    @app.post("/api/sessions/{sid}/close")
    async def close_session(sid: str):
        return session_to_json(platform.close_session(IRI(sid)), platform)

    # -- annotations ----------------------------------------------------------

    @app.post("/api/annotations")
    async def add_annotation(request: Request):
        doc = await read_json(request)
        reply = doc.get("inReplyTo")
        view = platform.add_annotation(
            session=IRI(_require(doc, "sessionId")),
            author=IRI(_require(doc, "author")),
            target=target_from_json(_require(doc, "target")),
            kind=_require(doc, "kind"),
            body=_require(doc, "body"),
            in_reply_to=IRI(reply) if reply is not None else None,
        )
        return annotation_to_json(view, platform)

    @app.get("/api/annotations")
    async def enlist_annotations(target: str, session: str | None = None):
        try:
            target_doc = json.loads(target)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"target must be JSON: {exc}") from None
        views = platform.enlist_annotations(
            target_from_json(target_doc),
            IRI(session) if session is not None else None)
        return {"annotations": [annotation_to_json(v, platform) for v in views]}

    @app.patch("/api/annotations/{aid}")
    async def edit_annotation(aid: str, request: Request):
        doc = await read_json(request)
        view = platform.edit_annotation(
            IRI(aid), _require(doc, "body"), IRI(_require(doc, "editor")))
        return annotation_to_json(view, platform)

    @app.delete("/api/annotations/{aid}")
    async def delete_annotation(aid: str, requester: str | None = None):
        if requester is None:
            raise ValidationError("the requester query parameter is required")
        retracted = platform.delete_annotation(IRI(aid), IRI(requester))
        return {"deleted": True, "annotationId": aid, "retractedTriples": retracted}

    # -- dashboard ------------------------------------------------------------

    @app.get("/api/dashboard")
    async def list_dashboard():
        return {"items": [item_to_json(i) for i in platform.list_dashboard_items()]}

    @app.post("/api/dashboard")
    async def add_dashboard_item(request: Request):
        doc = await read_json(request)
        item = platform.add_dashboard_item(
            query=query_from_dict(_require(doc, "query")),
            chart_type=_require(doc, "chartType"),
            title=_require(doc, "title"),
            description=doc.get("description"),
        )
        return item_to_json(item)

    @app.patch("/api/dashboard/{item_id}")
    async def update_dashboard_item(item_id: str, request: Request):
        doc = await read_json(request)
        unknown = set(doc) - {"query", "chartType", "title"}
        if unknown:
            raise ValidationError(f"unknown update keys {sorted(unknown)}")
        query = query_from_dict(doc["query"]) if "query" in doc else None
        item = platform.update_dashboard_item(
            IRI(item_id), new_query=query,
            new_chart_type=doc.get("chartType"), new_title=doc.get("title"))
        return item_to_json(item)

    @app.delete("/api/dashboard/{item_id}")
    async def delete_dashboard_item(item_id: str):
        removed = platform.delete_dashboard_item(IRI(item_id))
        return {"deleted": True, "itemId": removed.item_id.value}

    # -- export / import --------------------------------------------------

    @app.get("/api/export")
    async def export_dashboard():
        doc = platform.export_document()
        filename = f"cbi-export-{_timestamp_slug(doc['exportedAt'])}.json"
        return JSONResponse(doc, headers={
            "Content-Disposition": f'attachment; filename="{filename}"'})

    @app.post("/api/import")
    async def import_dashboard(request: Request):
        doc = await read_json(request)
        item_ids = platform.import_document(doc)
        return {"itemIds": [iri.value for iri in item_ids]}

    return app


def build_platform(config: ServiceConfig) -> CollabPlatform:
    return CollabPlatform(config.data_dir, generator=config.generator)
