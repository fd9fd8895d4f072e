"""HTTP service: patient views, chat sessions, and the JSONL event log.

Transport-only layer over Engine. Every error leaves as the same JSON
envelope {code, message, detail}; sessions are in-memory with a single
writer each; events append to one JSONL file per day so logs survive
restarts and can be replayed for usage analysis.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import __version__
from .engine import ArtifactError, Engine, EngineConfig
from .evidence import KINDS, EvidenceNotFound
from .router import HttpChatClient, build_context, fallback_answer

VIEWS = ("record", "importance", "ranges", "recommendation")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


def _envelope(status: int, code: str, message: str, detail=None) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message, "detail": detail})


# ----------------------------------------------------------------- event log


class EventLog:
    """Append-only JSONL log, one file per day, readable across restarts."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path_for(self, ts: float) -> Path:
        day = time.strftime("%Y%m%d", time.gmtime(ts))
        return self.directory / f"events-{day}.jsonl"

    def append(self, session_id: str, event_type: str, payload: dict, ts: float) -> dict:
        event = {"ts": ts, "session": session_id, "type": event_type, **payload}
        line = json.dumps(event, sort_keys=True)
        with self._lock:
            with self._path_for(ts).open("a") as fh:
                fh.write(line + "\n")
        return event

    def export(self) -> list[dict]:
        events: list[dict] = []
        for path in sorted(self.directory.glob("events-*.jsonl")):
            with path.open() as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        events.append(json.loads(line))
        return events


def summarize_events(events: list[dict]) -> dict:
    """Per-session usage means over a replayed log, rounded to two places."""
    sessions = sorted({e["session"] for e in events})
    n_chat = sum(1 for e in events if e["type"] == "chat")
    n_view = sum(1 for e in events if e["type"] == "view")
    n = len(sessions)
    return {
        "n_sessions": n,
        "n_chat_events": n_chat,
        "n_view_events": n_view,
        "chat_per_session": round(n_chat / n, 2) if n else 0.0,
        "view_per_session": round(n_view / n, 2) if n else 0.0,
    }


# ------------------------------------------------------------------ sessions


@dataclass
class Session:
    id: str
    patient_id: int | None = None
    active_view: str = "record"
    view_data: dict | None = None
    turns: list[tuple[str, str]] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    last_ts: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def stamp(self) -> float:
        """Next event timestamp; never decreases within the session."""
        ts = max(time.time(), self.last_ts)
        self.last_ts = ts
        return ts


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, patient_id: int | None) -> Session:
        session = Session(id=uuid.uuid4().hex[:12], patient_id=patient_id)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ApiError(404, "not_found", f"unknown session {session_id!r}")
        return session


# ----------------------------------------------------------------- app bits


class SessionBody(BaseModel):
    patient_id: int | None = None


class ChatBody(BaseModel):
    query: str


class EventBody(BaseModel):
    type: str
    view: str | None = None


_ENV_CLIENT = object()

EMPTY_QUERY_TEXT = "Please enter a question about a patient, the dataset, or the evidence."


def _client_from_env():
    url = os.environ.get("RISKSCOPE_LLM_URL")
    if not url:
        return None
    return HttpChatClient(url, os.environ.get("RISKSCOPE_LLM_KEY"))


def _view_payload(engine: Engine, view: str, patient_id: int | None) -> dict | None:
    if patient_id is None:
        return None
    if view == "record":
        return engine.patient_view(patient_id)
    if view == "importance":
        return engine.importance_payload(patient_id)
    if view == "ranges":
        return engine.ranges_payload(patient_id)
    payload = engine.recommendation_payload(patient_id)
    return payload["plan"] if payload.get("status") == "ok" else payload


def build_app(
    config: str | Path | EngineConfig | None = None,
    *,
    engine: Engine | None = None,
    chat_client=_ENV_CLIENT,
    log_dir: str | Path | None = None,
) -> FastAPI:
    if engine is None:
        if isinstance(config, (str, Path)):
            doc = json.loads(Path(config).read_text())
            log_dir = log_dir or doc.get("log_dir")
            engine = Engine(EngineConfig.from_file(config))
        else:
            engine = Engine(config)
    if chat_client is _ENV_CLIENT:
        chat_client = _client_from_env()
    log = EventLog(log_dir or os.environ.get("RISKSCOPE_LOG_DIR", "riskscope_logs"))
    sessions = SessionStore()

    app = FastAPI(title="riskscope", version=__version__)
    # The dashboard is served as static files from a different origin.
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    app.state.engine = engine
    app.state.sessions = sessions
    app.state.event_log = log
    app.state.chat_client = chat_client

    @app.exception_handler(ApiError)
    def _api_error(request: Request, exc: ApiError):
        return _envelope(exc.status, exc.code, exc.message, exc.detail)

    @app.exception_handler(RequestValidationError)
    def _validation_error(request: Request, exc: RequestValidationError):
        return _envelope(422, "invalid_request", "request failed validation", exc.errors())

    @app.exception_handler(StarletteHTTPException)
    def _http_error(request: Request, exc: StarletteHTTPException):
        return _envelope(exc.status_code, "not_found" if exc.status_code == 404 else "http_error", str(exc.detail))

    @app.exception_handler(Exception)
    def _unhandled(request: Request, exc: Exception):
        code = "artifact_error" if isinstance(exc, ArtifactError) else "internal_error"
        return _envelope(500, code, str(exc))

    def _patient(patient_id: int) -> int:
        if not engine.dataset.has_record(patient_id):
            raise ApiError(404, "not_found", f"unknown patient {patient_id}")
        return patient_id

    # ---------------------------------------------------------------- routes

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__, "artifacts": engine.artifact_checksums()}

    @app.get("/patients/{patient_id}")
    def patient(patient_id: int):
        return engine.patient_view(_patient(patient_id))

    @app.get("/patients/{patient_id}/prediction")
    def prediction(patient_id: int):
        return engine.prediction(_patient(patient_id))

    @app.get("/patients/{patient_id}/importance")
    def importance(patient_id: int, seed: int | None = None):
        return engine.importance_payload(_patient(patient_id), seed)

    @app.get("/patients/{patient_id}/ranges")
    def ranges(patient_id: int, seed: int | None = None):
        return engine.ranges_payload(_patient(patient_id), seed)

    @app.post("/patients/{patient_id}/recommendation")
    def recommendation(patient_id: int):
        return engine.recommendation_payload(_patient(patient_id))

    @app.get("/evidence/{feature}")
    def evidence(feature: str, kind: str = "importance"):
        if kind not in KINDS:
            raise ApiError(400, "invalid_request", f"kind must be one of {list(KINDS)}")
        try:
            return engine.evidence_payload(feature, kind)
        except EvidenceNotFound as exc:
            raise ApiError(404, "not_found", str(exc)) from exc

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionBody | None = None):
        patient_id = body.patient_id if body else None
        if patient_id is not None:
            _patient(patient_id)
        session = sessions.create(patient_id)
        with session.lock:
            ts = session.stamp()
            session.events.append(log.append(session.id, "session_start", {"patient": patient_id}, ts))
        return {"session_id": session.id, "patient_id": patient_id}

    @app.post("/sessions/{session_id}/chat")
    def chat(session_id: str, body: ChatBody):
        session = sessions.get(session_id)
        with session.lock:
            decision = engine.router.decide(body.query, session_patient=session.patient_id)
            view = None
            cause = None
            if decision.route == "grammar":
                try:
                    text, payload, view = engine.run_command(decision.command)
                except KeyError as exc:
                    raise ApiError(404, "not_found", str(exc)) from exc
                provenance = "grammar"
                pid = decision.command.args.get("patient_id")
                if pid is not None:
                    session.patient_id = pid
                if view is not None:
                    session.active_view = view
                    session.view_data = payload.get("plan", payload) if view == "recommendation" else payload
            elif decision.reason == "empty_query":
                text, payload, provenance = EMPTY_QUERY_TEXT, None, "unavailable"
            else:
                values = []
                if session.patient_id is not None:
                    rec = engine.dataset.record(session.patient_id)
                    values = [
                        {"name": s.name, "value": rec.values[j], "unit": s.unit}
                        for j, s in enumerate(engine.schema.features)
                    ]
                pack = build_context(session.turns, values, session.active_view, session.view_data, engine.kb)
                answer = fallback_answer(body.query, pack, chat_client)
                text, payload, provenance, cause = answer.text, None, answer.provenance, answer.cause
            session.turns.append((body.query, text))
            ts = session.stamp()
            event = log.append(
                session.id,
                "chat",
                {
                    "query": body.query,
                    "route": decision.route,
                    "intent": decision.intent,
                    "reason": decision.reason,
                    "provenance": provenance,
                },
                ts,
            )
            session.events.append(event)
        doc = decision.to_dict()
        doc.update({"session_id": session.id, "text": text, "payload": payload, "provenance": provenance, "view": view})
        if cause is not None:
            doc["cause"] = cause
        return doc

    @app.post("/sessions/{session_id}/events", status_code=201)
    def record_event(session_id: str, body: EventBody):
        session = sessions.get(session_id)
        if body.type != "view":
            raise ApiError(400, "invalid_request", "only view events can be posted")
        if body.view not in VIEWS:
            raise ApiError(400, "invalid_request", f"view must be one of {list(VIEWS)}")
        with session.lock:
            session.active_view = body.view
            session.view_data = _view_payload(engine, body.view, session.patient_id)
            ts = session.stamp()
            event = log.append(session.id, "view", {"view": body.view}, ts)
            session.events.append(event)
        return event

    @app.get("/sessions/{session_id}/log")
    def session_log(session_id: str):
        session = sessions.get(session_id)
        with session.lock:
            return {"session_id": session.id, "events": list(session.events)}

    return app


def run(config: str | Path | None = None, host: str = "127.0.0.1", port: int = 8080) -> None:
    import uvicorn

    uvicorn.run(build_app(config), host=host, port=port, log_level="warning")
