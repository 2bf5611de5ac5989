"""HTTP adapter: thin JSON layer over CoachService.

Bodies are plain JSON documents validated by the domain layer, errors map
to {code, message} with the code equal to the raising error class name,
and every response echoes the event-log position (as_of_seq) it was served
at.  Deterministic reads accept explicit as_of/now query parameters.
"""

from __future__ import annotations

from datetime import date
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .clock import parse_iso
from .errors import (
    BadCallbackData,
    CoachError,
    ConfigInvalid,
    CorruptLine,
    DateOutOfPlan,
    DuplicateChat,
    DuplicateEnqueue,
    EmptyBroadcast,
    FieldOutOfRange,
    MalformedUpdate,
    MalformedWeek,
    NoAssignedPlan,
    NoFeasibleActivity,
    OverlapViolation,
    PayloadInvalid,
    StorageFailure,
    UnknownActivity,
    UnknownChat,
    UnknownPlan,
    UnknownTag,
    UnknownTemplate,
    UnknownUser,
)
from .service import CoachService

_STATUS = {
    UnknownUser: 404,
    UnknownPlan: 404,
    UnknownTemplate: 404,
    UnknownChat: 404,
    UnknownActivity: 404,
    DuplicateChat: 409,
    DuplicateEnqueue: 409,
    OverlapViolation: 409,
    NoAssignedPlan: 409,
    NoFeasibleActivity: 409,
    FieldOutOfRange: 422,
    UnknownTag: 422,
    MalformedWeek: 422,
    PayloadInvalid: 422,
    EmptyBroadcast: 422,
    MalformedUpdate: 400,
    BadCallbackData: 400,
    DateOutOfPlan: 400,
    ConfigInvalid: 500,
    StorageFailure: 500,
    CorruptLine: 500,
}


def _parse_date(value: str | None) -> date | None:
    if value is None:
        return None
    try:
        return date.fromisoformat(value)
    except ValueError as exc:
        raise PayloadInvalid(f"bad date {value!r}") from exc


def _parse_ts(value: str | None):
    if value is None:
        return None
    try:
        return parse_iso(value)
    except ValueError as exc:
        raise PayloadInvalid(f"bad timestamp {value!r}") from exc


async def _json_body(request: Request) -> dict:
    try:
        doc = await request.json()
    except ValueError as exc:
        raise PayloadInvalid(f"body is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise PayloadInvalid("body must be a JSON object")
    return doc


def create_app(service: CoachService, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="coachloop", docs_url=None, redoc_url=None)

    @app.exception_handler(CoachError)
    async def coach_error(_request: Request, exc: CoachError) -> JSONResponse:
        status = _STATUS.get(type(exc), 400)
        return JSONResponse(status_code=status,
                            content={"code": exc.code, "message": str(exc)})

    def _guard(request: Request) -> JSONResponse | None:
        token = service.config.caregiver_token
        if token and request.headers.get("x-caregiver-token") != token:
            return JSONResponse(status_code=401, content={
                "code": "Unauthorized",
                "message": "missing or wrong caregiver token",
            })
        return None

    def _ok(doc: dict) -> dict:
        doc["as_of_seq"] = service.state.last_seq
        return doc

    @app.get("/health")
    async def health() -> dict:
        return _ok({"status": "ok"})

    @app.post("/users")
    async def register(request: Request):
        denied = _guard(request)
        if denied:
            return denied
        body = await _json_body(request)
        chat_id = body.pop("chat_id", None)
        display_name = body.pop("display_name", None)
        template_id = body.pop("template_id", None)
        now = _parse_ts(request.query_params.get("now"))
        result = service.register_user(body, chat_id, display_name=display_name,
                                       template_id=template_id, now=now)
        return _ok(result)

    @app.post("/users/{user_id}/plan")
    async def assign(user_id: str, request: Request):
        denied = _guard(request)
        if denied:
            return denied
        body = await _json_body(request)
        plan = service.assign_plan(
            user_id,
            template_id=body.get("template_id"),
            week_start=_parse_date(body.get("week_start")),
            now=_parse_ts(request.query_params.get("now")),
        )
        return _ok({"plan": plan.to_dict()})

    @app.post("/users/{user_id}/refine")
    async def refine(user_id: str, request: Request):
        denied = _guard(request)
        if denied:
            return denied
        body = await _json_body(request)
        template_id = body.get("template_id")
        if not template_id:
            raise PayloadInvalid("refine body needs template_id")
        result = service.refine_plan(
            user_id, template_id,
            as_of=_parse_date(body.get("as_of")),
            now=_parse_ts(request.query_params.get("now")),
        )
        return _ok(result)

    @app.get("/ranking")
    async def ranking(request: Request):
        denied = _guard(request)
        if denied:
            return denied
        rows = service.ranking(as_of=_parse_date(request.query_params.get("as_of")))
        return _ok({"rows": rows})

    @app.get("/users/{user_id}")
    async def detail(user_id: str, request: Request):
        denied = _guard(request)
        if denied:
            return denied
        doc = service.user_detail(
            user_id, as_of=_parse_date(request.query_params.get("as_of")))
        return _ok(doc)

    @app.post("/broadcast")
    async def broadcast(request: Request):
        denied = _guard(request)
        if denied:
            return denied
        body = await _json_body(request)
        messages = service.broadcast(
            body.get("text", ""),
            cohort_filter=body.get("filter", "all"),
            now=_parse_ts(request.query_params.get("now")),
        )
        return _ok({"messages": messages})

    @app.get("/clusters/proposed")
    async def clusters_proposed(request: Request):
        denied = _guard(request)
        if denied:
            return denied
        return _ok({"clusters": service.propose_clusters()})

    @app.post("/clusters/confirm")
    async def clusters_confirm(request: Request):
        denied = _guard(request)
        if denied:
            return denied
        body = await _json_body(request)
        edits = body.get("edits", [])
        if not isinstance(edits, list):
            raise PayloadInvalid("edits must be a list")
        confirmed = service.confirm_clusters(
            edits, now=_parse_ts(request.query_params.get("now")))
        return _ok({"clusters": confirmed})

    @app.post("/bot/update")
    async def bot_update(request: Request):
        body = await request.body()
        messages = service.bot_update(
            body, now=_parse_ts(request.query_params.get("now")))
        return _ok({"messages": messages})

    @app.get("/notifications/due")
    async def notifications_due(request: Request):
        denied = _guard(request)
        if denied:
            return denied
        dispatched = service.collect_due(
            now=_parse_ts(request.query_params.get("now")))
        return _ok({"dispatched": dispatched})

    if ui_dir is None:
        candidate = Path("frontend") / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    @app.get("/")
    async def root() -> Response:
        return JSONResponse({"service": "coachloop", "ui": "/ui"})

    return app
