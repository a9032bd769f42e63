"""HTTP service wrapping one snapshot behind an atomic holder.

Requests always see a consistent snapshot: the holder swaps the whole
immutable object under a lock, so a rebuild never shows a half-updated
graph to an in-flight search. Feedback is durable (fsynced to the log)
before the id is acknowledged.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Header, HTTPException, Query as QueryParam
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .assist import Dictionary, build_dictionary, check_term, suggest
from .feedback import FeedbackError, FeedbackLog, record_feedback, rebuild_with_feedback
from .kgraph import GraphSnapshot, save_snapshot
from .search import EmptyQueryError, SearchParams, run_search


class SnapshotHolder:
    """Thread-safe owner of the currently served snapshot.

    Also caches the assist dictionary per snapshot version and, when
    given a path, persists every swapped-in snapshot back to disk.
    """

    def __init__(self, snapshot: GraphSnapshot | None = None, save_path: str | Path | None = None):
        self._lock = threading.Lock()
        self._snapshot = snapshot
        self._dictionary: Dictionary | None = None
        self._dictionary_version: int | None = None
        self.save_path = Path(save_path) if save_path else None

    @property
    def current(self) -> GraphSnapshot | None:
        with self._lock:
            return self._snapshot

    def swap(self, snapshot: GraphSnapshot) -> None:
        with self._lock:
            self._snapshot = snapshot
        if self.save_path is not None:
            save_snapshot(snapshot, self.save_path)

    def dictionary(self) -> Dictionary | None:
        with self._lock:
            snapshot = self._snapshot
            if snapshot is None:
                return None
            if self._dictionary is None or self._dictionary_version != snapshot.version:
                self._dictionary = build_dictionary(snapshot)
                self._dictionary_version = snapshot.version
            return self._dictionary


class FeedbackBody(BaseModel):
    query_raw: str
    doc_id: str
    relevant: bool
    value_added: int = Field(default=3)
    result_kind: str
    path_edges: list[tuple[str, str]] = Field(default_factory=list)


def _result_payload(result) -> dict:
    explanation = result.explanation
    return {
        "doc_id": result.doc_id,
        "kind": result.kind,
        "score": result.score,
        "origin": result.origin,
        "path_nodes": list(result.path_nodes),
        "path_edges": [{"src": e.src, "dst": e.dst} for e in result.path_edges],
        "explanation": {
            "template_id": explanation.template_id,
            "text": explanation.text,
            "evidence": explanation.evidence,
        }
        if explanation
        else None,
    }


def create_app(
    holder: SnapshotHolder,
    *,
    feedback_log: FeedbackLog | None = None,
    admin_token: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the API around a holder. All state lives in the holder and
    the log, so tests can drive the app with plain objects."""
    app = FastAPI(title="lessons-learned graph search")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def require_snapshot() -> GraphSnapshot:
        snapshot = holder.current
        if snapshot is None:
            raise HTTPException(status_code=503, detail="no snapshot loaded")
        return snapshot

    @app.get("/api/health")
    def health() -> dict:
        snapshot = holder.current
        return {"snapshot_version": snapshot.version if snapshot else None}

    @app.get("/api/search")
    def search(q: str = QueryParam(...), limit: int = QueryParam(20)):
        snapshot = require_snapshot()
        if limit < 1:
            return JSONResponse(status_code=422, content={"error": "invalid_limit"})
        try:
            outcome = run_search(snapshot, q, SearchParams(limit=limit))
        except EmptyQueryError as exc:
            dictionary = holder.dictionary()
            suggestions = {
                term: suggest(term, dictionary) if dictionary else []
                for term in exc.unknown_terms
            }
            return JSONResponse(
                status_code=422,
                content={
                    "error": "empty_query",
                    "unknown_terms": exc.unknown_terms,
                    "suggestions": suggestions,
                },
            )
        docs = snapshot.docs
        return {
            "query_echo": q,
            "unknown_terms": outcome.query.unknown_terms,
            "snapshot_version": snapshot.version,
            "results": [
                dict(_result_payload(r), title=docs[r.doc_id].title) for r in outcome.results
            ],
            "subgraph": outcome.subgraph.to_payload(),
        }

    @app.get("/api/suggest")
    def suggest_endpoint(q: str = QueryParam(...)):
        require_snapshot()
        dictionary = holder.dictionary()
        checked = check_term(q, dictionary)
        return {
            "known": checked.known,
            "df": checked.df,
            "suggestions": [] if checked.known else suggest(q, dictionary),
        }

    @app.post("/api/feedback")
    def feedback(body: FeedbackBody):
        snapshot = require_snapshot()
        if feedback_log is None:
            raise HTTPException(status_code=503, detail="feedback log not configured")
        try:
            record_id = record_feedback(
                feedback_log,
                snapshot,
                query_raw=body.query_raw,
                doc_id=body.doc_id,
                relevant=body.relevant,
                value_added=body.value_added,
                result_kind=body.result_kind,
                path_edges=tuple(body.path_edges),
            )
        except FeedbackError as exc:
            return JSONResponse(status_code=422, content={"error": "invalid_feedback", "detail": str(exc)})
        return {"id": record_id}

    @app.post("/api/rebuild")
    def rebuild(x_admin_token: str | None = Header(default=None)):
        snapshot = require_snapshot()
        if admin_token is not None and x_admin_token != admin_token:
            raise HTTPException(status_code=403, detail="bad admin token")
        log = feedback_log or FeedbackLog()
        rebuilt, seconds, _report = rebuild_with_feedback(snapshot, log)
        holder.swap(rebuilt)
        return {"snapshot_version": rebuilt.version, "rebuild_seconds": seconds}

    @app.get("/api/docs/{doc_id}")
    def get_doc(doc_id: str):
        snapshot = require_snapshot()
        doc = snapshot.docs.get(doc_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"unknown document {doc_id!r}")
        return doc.to_dict()

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
