"""HTTP facade over the pipeline, store, and evaluation.

All bodies are JSON in the store's canonical schemas; every mutating endpoint
persists before responding and returns the updated resource, so a follow-up
GET reads back exactly what the mutation returned. Errors use a uniform
envelope {"code": ..., "detail": ...}; the code table lives in the README.
"""

from __future__ import annotations

import os
import uuid
from datetime import datetime, timezone
from typing import Any, Optional

from fastapi import Body, FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from . import pipeline as pl
from .gateway import (
    AuthError,
    FixtureMiss,
    Gateway,
    RateLimited,
    Timeout,
    TransportError,
)
from .model import (
    Micronote,
    Notebook,
    Transcript,
    UserProfile,
    event_from_dict,
    example_from_dict,
    micronote_to_dict,
    notebook_to_dict,
    parse_timestamp,
    profile_to_dict,
    transcript_from_dict,
)
from .report import build_report
from .store import (
    SCHEMA_VERSION,
    CorruptDocument,
    InvalidNotebook,
    InvalidProfile,
    NotFound,
    Store,
    VersionTooNew,
    export_markdown,
)
from .stylometry import EmptyCorpus
from .stylometry import NoNotes as MetricNoNotes
from .transcript import EmptyTranscript, FormatError

ENV_STORE_DIR = "NOTEELINE_STORE_DIR"
ENV_BIND_ADDR = "NOTEELINE_BIND_ADDR"


class ApiError(Exception):
    """Application error with a machine code and an HTTP status."""

    def __init__(self, http_status: int, code: str, detail: str) -> None:
        super().__init__(detail)
        self.http_status = http_status
        self.code = code
        self.detail = detail


# one (status, code) per underlying error class; see README error table
_ERROR_MAP: list[tuple[type, int, str]] = [
    (InvalidNotebook, 422, "INVALID_NOTEBOOK"),
    (InvalidProfile, 422, "INVALID_PROFILE"),
    (NotFound, 404, "NOT_FOUND"),
    (CorruptDocument, 500, "CORRUPT_DOCUMENT"),
    (VersionTooNew, 500, "VERSION_TOO_NEW"),
    (FormatError, 422, "FORMAT_ERROR"),
    (EmptyTranscript, 422, "EMPTY_TRANSCRIPT"),
    (pl.TooFewNotes, 422, "TOO_FEW_NOTES"),
    (pl.NoNotes, 422, "NO_NOTES"),
    (MetricNoNotes, 422, "NO_NOTES"),
    (EmptyCorpus, 422, "EMPTY_CORPUS"),
    (pl.UnknownNote, 404, "UNKNOWN_NOTE"),
    (pl.NotInThemeMode, 409, "NOT_IN_THEME_MODE"),
    (pl.ParseError, 502, "PARSE_ERROR"),
    (FixtureMiss, 503, "FIXTURE_MISS"),
    (AuthError, 502, "AUTH_ERROR"),
    (RateLimited, 503, "RATE_LIMITED"),
    (Timeout, 504, "TIMEOUT"),
    (TransportError, 502, "TRANSPORT_ERROR"),
]


def map_error(err: Exception) -> ApiError:
    if isinstance(err, ApiError):
        return err
    for klass, status, code in _ERROR_MAP:
        if isinstance(err, klass):
            return ApiError(status, code, str(err))
    return ApiError(500, "INTERNAL", str(err))


def _now() -> datetime:
    return datetime.now(timezone.utc)


def create_app(
    store: Optional[Store] = None,
    gateway: Optional[Gateway] = None,
    pipeline: Optional[pl.Pipeline] = None,
) -> FastAPI:
    store = store or Store(os.environ.get(ENV_STORE_DIR, "./noteeline-data"))
    gateway = gateway or Gateway(fixtures=store.fixture_store())
    pipeline = pipeline or pl.Pipeline(gateway)

    app = FastAPI(title="noteeline", version="0.1.0")
    # the web UI is typically served from another local port
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ApiError)
    async def _handle_api_error(_request: Request, err: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=err.http_status, content={"code": err.code, "detail": err.detail}
        )

    def load_notebook(notebook_id: str) -> Notebook:
        try:
            return store.load_notebook(notebook_id)
        except Exception as err:
            raise map_error(err) from err

    def save_and_return(nb: Notebook) -> dict[str, Any]:
        try:
            store.save_notebook(nb)
        except Exception as err:
            raise map_error(err) from err
        return notebook_to_dict(nb)

    def require(body: dict[str, Any], key: str) -> Any:
        if not isinstance(body, dict) or key not in body:
            raise ApiError(422, "VALIDATION", f"missing field {key!r}")
        return body[key]

    # -- health ---------------------------------------------------------------

    @app.get("/health")
    def healthcheck() -> dict[str, Any]:
        degraded = gateway.mode == "live" and not gateway.configured
        return {
            "status": "degraded" if degraded else "ok",
            "mode": gateway.mode,
            "schema_version": SCHEMA_VERSION,
        }

    # -- profiles -------------------------------------------------------------

    @app.post("/profiles/{user_id}/onboarding")
    def onboard(user_id: str, body: dict = Body(...)) -> JSONResponse:
        examples_raw = require(body, "examples")
        if not isinstance(examples_raw, list) or len(examples_raw) != 3:
            raise ApiError(422, "VALIDATION", "exactly 3 onboarding examples required")
        try:
            examples = [example_from_dict(e) for e in examples_raw]
            profile = UserProfile(user_id=user_id, examples=examples)
            store.save_profile(profile)
        except (KeyError, TypeError) as err:
            raise ApiError(422, "VALIDATION", f"bad example payload: {err}") from err
        except Exception as err:
            raise map_error(err) from err
        return JSONResponse(status_code=201, content=profile_to_dict(profile))

    @app.get("/profiles/{user_id}")
    def get_profile(user_id: str) -> dict[str, Any]:
        try:
            return profile_to_dict(store.load_profile(user_id))
        except Exception as err:
            raise map_error(err) from err

    # -- notebooks ------------------------------------------------------------

    @app.post("/notebooks")
    def create_notebook(body: dict = Body(...)) -> JSONResponse:
        title = str(require(body, "title"))
        user_id = str(require(body, "user_id"))
        if "transcript" in body and body["transcript"] is not None:
            try:
                transcript = transcript_from_dict(body["transcript"])
            except (KeyError, TypeError, ValueError) as err:
                raise ApiError(422, "VALIDATION", f"bad transcript payload: {err}") from err
        else:
            transcript = Transcript(video_ref="", language="und", segments=[])
        nb = Notebook(
            id=body.get("id") or uuid.uuid4().hex[:12],
            title=title,
            user_id=user_id,
            transcript=transcript,
        )
        return JSONResponse(status_code=201, content=save_and_return(nb))

    @app.get("/notebooks")
    def list_notebooks() -> list[str]:
        return store.list_notebooks()

    @app.get("/notebooks/{notebook_id}")
    def get_notebook(notebook_id: str) -> dict[str, Any]:
        return notebook_to_dict(load_notebook(notebook_id))

    # -- micronotes -----------------------------------------------------------

    @app.post("/notebooks/{notebook_id}/micronotes")
    def add_micronote(notebook_id: str, body: dict = Body(...)) -> JSONResponse:
        nb = load_notebook(notebook_id)
        text = str(require(body, "text"))
        video_time = float(require(body, "video_time"))
        created = body.get("created_wall")
        finished = body.get("finished_wall")
        now = _now()
        try:
            note = Micronote(
                id=uuid.uuid4().hex[:12],
                text=text,
                video_time=video_time,
                created_wall=parse_timestamp(created) if created else now,
                finished_wall=parse_timestamp(finished) if finished else now,
            )
        except ValueError as err:
            raise ApiError(422, "VALIDATION", f"bad timestamp: {err}") from err
        nb = nb.with_changes(micronotes=nb.micronotes + (note,))
        save_and_return(nb)
        return JSONResponse(status_code=201, content=micronote_to_dict(note))

    @app.patch("/notebooks/{notebook_id}/notes/{note_id}")
    def edit_note(notebook_id: str, note_id: str, body: dict = Body(...)) -> dict[str, Any]:
        nb = load_notebook(notebook_id)
        note = nb.get_micronote(note_id)
        if note is None:
            raise ApiError(404, "UNKNOWN_NOTE", f"no micronote {note_id!r}")
        if "micronote_text" not in body and "expansion_text" not in body:
            raise ApiError(
                422, "VALIDATION", "provide micronote_text and/or expansion_text"
            )
        if "micronote_text" in body:
            new_text = str(body["micronote_text"])
            notes = tuple(
                m if m.id != note_id else Micronote(
                    id=m.id,
                    text=new_text,
                    video_time=m.video_time,
                    created_wall=m.created_wall,
                    finished_wall=m.finished_wall,
                )
                for m in nb.micronotes
            )
            nb = nb.with_changes(micronotes=notes)
        if "expansion_text" in body:
            if note_id not in nb.expansions:
                raise ApiError(404, "UNKNOWN_NOTE", f"no expansion for {note_id!r}")
            expansions = dict(nb.expansions)
            old = expansions[note_id]
            from dataclasses import replace as dc_replace

            expansions[note_id] = dc_replace(old, text=str(body["expansion_text"]))
            nb = nb.with_changes(expansions=expansions)
        return save_and_return(nb)

    # -- synthesis ------------------------------------------------------------

    @app.post("/notebooks/{notebook_id}/expand")
    def expand(
        notebook_id: str,
        note: Optional[str] = Query(default=None),
        personalize: bool = Query(default=True),
    ) -> dict[str, Any]:
        nb = load_notebook(notebook_id)
        profile: Optional[UserProfile] = None
        if personalize:
            try:
                profile = store.load_profile(nb.user_id)
            except NotFound:
                profile = None
        try:
            nb = pipeline.expand_all(nb, profile, personalize=personalize, only_note=note)
        except Exception as err:
            raise map_error(err) from err
        return save_and_return(nb)

    @app.post("/notebooks/{notebook_id}/themes")
    def organize_themes(notebook_id: str) -> dict[str, Any]:
        nb = load_notebook(notebook_id)
        try:
            themes = pipeline.organize_by_theme(nb)
        except Exception as err:
            raise map_error(err) from err
        nb = pipeline.apply_themes(nb, themes)
        return save_and_return(nb)

    @app.post("/notebooks/{notebook_id}/themes/move")
    def move_note(notebook_id: str, body: dict = Body(...)) -> dict[str, Any]:
        nb = load_notebook(notebook_id)
        note_id = str(require(body, "note_id"))
        target = str(require(body, "target"))
        try:
            nb = pipeline.move_note(nb, note_id, target)
        except Exception as err:
            raise map_error(err) from err
        return save_and_return(nb)

    @app.post("/notebooks/{notebook_id}/order")
    def set_order(notebook_id: str, body: dict = Body(...)) -> dict[str, Any]:
        nb = load_notebook(notebook_id)
        mode = str(require(body, "mode"))
        if mode == "by_time":
            nb = pipeline.order_by_time(nb)
        elif mode == "by_theme":
            if nb.themes is None:
                raise ApiError(409, "NOT_IN_THEME_MODE", "no themes to order by")
            nb = nb.with_changes(ordering_mode="by_theme")
        else:
            raise ApiError(422, "VALIDATION", f"unknown ordering mode {mode!r}")
        return save_and_return(nb)

    @app.post("/notebooks/{notebook_id}/cues")
    def cues(notebook_id: str, regenerate: bool = Query(default=False)) -> dict[str, Any]:
        nb = load_notebook(notebook_id)
        nonce = nb.cue_nonce + 1 if regenerate else nb.cue_nonce
        try:
            questions = pipeline.generate_cue_questions(nb, nonce=nonce)
        except Exception as err:
            raise map_error(err) from err
        nb = nb.with_changes(cue_questions=tuple(questions), cue_nonce=nonce)
        return save_and_return(nb)

    @app.post("/notebooks/{notebook_id}/summary")
    def summary(notebook_id: str) -> dict[str, Any]:
        nb = load_notebook(notebook_id)
        try:
            text = pipeline.generate_summary(nb)
        except Exception as err:
            raise map_error(err) from err
        nb = nb.with_changes(summary=text)
        return save_and_return(nb)

    # -- events, report, export ------------------------------------------------

    @app.post("/notebooks/{notebook_id}/events")
    def append_events(notebook_id: str, body: dict = Body(...)) -> dict[str, Any]:
        nb = load_notebook(notebook_id)
        events_raw = require(body, "events")
        if not isinstance(events_raw, list):
            raise ApiError(422, "VALIDATION", "events must be an array")
        try:
            new_events = tuple(event_from_dict(e) for e in events_raw)
        except (KeyError, TypeError, ValueError) as err:
            raise ApiError(422, "VALIDATION", f"bad event payload: {err}") from err
        nb = nb.with_changes(events=nb.events + new_events)
        return save_and_return(nb)

    @app.get("/notebooks/{notebook_id}/report")
    def report(notebook_id: str) -> dict[str, Any]:
        nb = load_notebook(notebook_id)
        try:
            document = build_report(nb)
        except Exception as err:
            raise map_error(err) from err
        store.save_report(nb.id, document)
        return document

    @app.get("/notebooks/{notebook_id}/export.md")
    def export(notebook_id: str) -> PlainTextResponse:
        nb = load_notebook(notebook_id)
        return PlainTextResponse(export_markdown(nb), media_type="text/markdown")

    return app


def main() -> None:
    """Entry point for `serve`: binds NOTEELINE_BIND_ADDR (default 127.0.0.1:8000)."""
    import uvicorn

    bind = os.environ.get(ENV_BIND_ADDR, "127.0.0.1:8000")
    host, _, port = bind.partition(":")
    uvicorn.run(create_app(), host=host or "127.0.0.1", port=int(port or 8000))
