"""HTTP session service: create a correction session from a predicted parse,
apply natural-feedback edit operations, confirm and persist the dialogue.

Every 4xx response body is `{"error": {"kind": ..., "message": ...}}` with
`kind` drawn from the module error taxonomy, so clients can switch on it.
"""
from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..corpus import load_corpus, load_default_corpus
from ..correct import DialogueState, apply_op, compile_state, new_state, parse_feedback
from ..errors import SubquestError
from ..lf import EntityMap, serialize
from ..models import TemplateInverseModel
from .config import GatewayConfig
from .remote import RemoteCorrectionModel


@dataclass
class SessionEntry:
    state: DialogueState
    status: str = "open"  # open | confirmed
    created: str = ""
    updated: str = ""
    predicted_lf: str = ""
    turns: list = field(default_factory=list)
    record: dict | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _error(status: int, kind: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"kind": kind, "message": message}})


_CLIENT_ERROR_STATUS = {
    "SyntaxError": 400,
    "UnboundVariable": 400,
    "UnknownPredicate": 400,
    "AmbiguousGrouping": 400,
    "UnclassifiableForm": 400,
    "EntityNotFound": 400,
    "MissingEntity": 400,
    "UnrecognizedOperation": 422,
    "BadIndex": 422,
    "IndexOutOfRange": 422,
    "ResolutionFailed": 422,
    "NoTemplateMatch": 422,
    "DisconnectedComponents": 422,
    "MultipleAnswerVars": 422,
}


def session_view(sid: str, entry: SessionEntry) -> dict:
    state = entry.state
    steps = []
    for i, step in enumerate(state.steps, 1):
        steps.append({
            "index": i,
            "templated_q": step.templated_q,
            "answers": step.answers.to_json() if step.answers is not None else None,
        })
    compiled = None
    compile_error = None
    try:
        compiled = serialize(compile_state(state))
    except SubquestError as exc:
        compile_error = exc.kind
    return {
        "id": sid,
        "status": entry.status,
        "question": state.complex_question,
        "qtype": state.qtype,
        "steps": steps,
        "compiled_lf": compiled,
        "compile_error": compile_error,
    }


def create_app(config: GatewayConfig | None = None) -> FastAPI:
    config = config or GatewayConfig()
    corpus = load_corpus(config.corpus) if config.corpus else load_default_corpus()
    store = None
    if config.store:
        from ..kb import load_store

        store = load_store(config.store)

    if config.model.startswith("remote:"):
        model = RemoteCorrectionModel(config.model[len("remote:"):], corpus)
    else:
        model = TemplateInverseModel(corpus)

    app = FastAPI(title="subquest gateway")
    sessions: dict[str, SessionEntry] = {}
    registry_lock = threading.Lock()
    records_path = Path(config.records)
    persist_lock = threading.Lock()

    app.state.corpus = corpus
    app.state.sessions = sessions

    @app.exception_handler(SubquestError)
    async def on_domain_error(request: Request, exc: SubquestError):
        return _error(_CLIENT_ERROR_STATUS.get(exc.kind, 500), exc.kind, str(exc))

    @app.post("/sessions")
    def create_session(body: dict):
        question = body.get("question", "")
        lf_text = body.get("predicted_lf", "")
        emap = EntityMap.from_json(body.get("entities", {}))
        session_store = store
        if body.get("store"):
            from ..kb import load_store

            session_store = load_store(body["store"])
        state = new_state(question, lf_text, emap, corpus, session_store)
        sid = uuid.uuid4().hex[:12]
        entry = SessionEntry(state=state, created=_now(), updated=_now(), predicted_lf=lf_text)
        entry.turns.append(_agent_turn(entry))
        with registry_lock:
            sessions[sid] = entry
        return session_view(sid, entry)

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        entry = sessions.get(sid)
        if entry is None:
            return _error(404, "UnknownSession", f"no session {sid}")
        return session_view(sid, entry)

    @app.post("/sessions/{sid}/feedback")
    def feedback(sid: str, body: dict):
        entry = sessions.get(sid)
        if entry is None:
            return _error(404, "UnknownSession", f"no session {sid}")
        utterance = body.get("utterance", "")
        with entry.lock:
            if entry.status == "confirmed":
                return _error(409, "SessionConfirmed", "confirmed sessions are immutable")
            op = parse_feedback(utterance)
            entry.state = apply_op(entry.state, op, model)
            entry.updated = _now()
            entry.turns.append({"speaker": "user", "text": utterance,
                                "op": type(op).__name__.lower(), "lf_snapshot": None})
            entry.turns.append(_agent_turn(entry))
        return session_view(sid, entry)

    @app.post("/sessions/{sid}/confirm")
    def confirm(sid: str):
        entry = sessions.get(sid)
        if entry is None:
            return _error(404, "UnknownSession", f"no session {sid}")
        with entry.lock:
            if entry.status == "confirmed":
                return entry.record
            entry.status = "confirmed"
            entry.updated = _now()
            record = {
                "id": sid,
                "complex_question": entry.state.complex_question,
                "predicted_lf": entry.predicted_lf,
                "gold_lf": None,
                "turns": entry.turns,
                "confirmed_at": entry.updated,
            }
            try:
                compiled = serialize(compile_state(entry.state))
            except SubquestError:
                compiled = None
            record["final_lf"] = compiled
            entry.record = record
            with persist_lock:
                with records_path.open("a", encoding="utf-8") as f:
                    f.write(json.dumps(record, ensure_ascii=False) + "\n")
                    f.flush()
        return record

    def _agent_turn(entry: SessionEntry) -> dict:
        try:
            snapshot = serialize(compile_state(entry.state))
        except SubquestError:
            snapshot = None
        return {
            "speaker": "agent",
            "text": " ".join(s.templated_q for s in entry.state.steps),
            "op": None,
            "lf_snapshot": snapshot,
        }

    return app
