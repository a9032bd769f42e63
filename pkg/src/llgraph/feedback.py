"""Relevance feedback: a durable append-only log and the weight-update
rules that fold judgments back into the graph.

A judgment on a transitive result adjusts every edge of its path by a
multiplier f:

    relevant:      f = 1 + eta * (value_added - 3) / 2
    not relevant:  f = 1 - eta

Weights stay clamped to [0.01, 0.99] so edges never vanish or saturate.
Each snapshot remembers the last applied record id (its watermark);
apply_feedback only consumes newer records, while a rebuild replays the
whole log against fresh edges.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from .kgraph import BuildConfig, GraphEdge, GraphSnapshot, build_graph
from .textmine import ClassifierParams, analyze_corpus

WEIGHT_FLOOR = 0.01
WEIGHT_CEIL = 0.99


class FeedbackError(Exception):
    """Raised for judgments that cannot be recorded (bad rating, unknown
    document, path on a direct result, ...)."""


@dataclass(frozen=True)
class FeedbackRecord:
    """One user judgment of one search result."""

    id: int
    query_raw: str
    doc_id: str
    relevant: bool
    value_added: int  # 1..5, only meaningful when relevant
    result_kind: str  # direct | transitive
    path_edges: tuple[tuple[str, str], ...] = ()
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "query_raw": self.query_raw,
            "doc_id": self.doc_id,
            "relevant": self.relevant,
            "value_added": self.value_added,
            "result_kind": self.result_kind,
            "path_edges": [list(pair) for pair in self.path_edges],
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FeedbackRecord":
        return cls(
            id=data["id"],
            query_raw=data["query_raw"],
            doc_id=data["doc_id"],
            relevant=data["relevant"],
            value_added=data["value_added"],
            result_kind=data["result_kind"],
            path_edges=tuple((p[0], p[1]) for p in data.get("path_edges", [])),
            created_at=data.get("created_at", ""),
        )


def _validate_fields(
    snapshot: GraphSnapshot,
    doc_id: str,
    relevant: bool,
    value_added: int,
    result_kind: str,
    path_edges: tuple[tuple[str, str], ...],
) -> None:
    if not isinstance(value_added, int) or isinstance(value_added, bool) or not 1 <= value_added <= 5:
        raise FeedbackError(f"value_added must be an integer in 1..5, got {value_added!r}")
    if result_kind not in ("direct", "transitive"):
        raise FeedbackError(f"result_kind must be 'direct' or 'transitive', got {result_kind!r}")
    if result_kind == "direct" and path_edges:
        raise FeedbackError("a direct result has no path to judge")
    if result_kind == "transitive" and not path_edges:
        raise FeedbackError("a transitive judgment needs the result's path edges")
    if doc_id not in snapshot.docs:
        raise FeedbackError(f"unknown document {doc_id!r}")


class FeedbackLog:
    """Append-only JSONL log with sequential ids.

    Every append is flushed and fsynced before the id is handed back, so
    an acknowledged judgment survives a crash.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._records: list[FeedbackRecord] = []
        if self.path is not None and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._records.append(FeedbackRecord.from_dict(json.loads(line)))

    @property
    def records(self) -> list[FeedbackRecord]:
        return list(self._records)

    def next_id(self) -> int:
        return self._records[-1].id + 1 if self._records else 1

    def append(self, record: FeedbackRecord) -> None:
        if self._records and record.id <= self._records[-1].id:
            raise FeedbackError(f"record id {record.id} not increasing")
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        self._records.append(record)

    def pending(self, watermark: int) -> list[FeedbackRecord]:
        return [r for r in self._records if r.id > watermark]


def record_feedback(
    log: FeedbackLog,
    snapshot: GraphSnapshot,
    *,
    query_raw: str,
    doc_id: str,
    relevant: bool,
    value_added: int = 3,
    result_kind: str,
    path_edges: tuple[tuple[str, str], ...] = (),
    created_at: str = "",
) -> int:
    """Validate a judgment against the snapshot and persist it.

    Returns the assigned record id; the record is durable when this
    returns.
    """
    path_edges = tuple((a, b) if a < b else (b, a) for a, b in path_edges)
    _validate_fields(snapshot, doc_id, relevant, value_added, result_kind, path_edges)
    record = FeedbackRecord(
        id=log.next_id(),
        query_raw=query_raw,
        doc_id=doc_id,
        relevant=relevant,
        value_added=value_added,
        result_kind=result_kind,
        path_edges=path_edges,
        created_at=created_at,
    )
    log.append(record)
    return record.id


def feedback_multiplier(relevant: bool, value_added: int, eta: float) -> float:
    if relevant:
        return 1.0 + eta * (value_added - 3) / 2.0
    return 1.0 - eta


def _clamp(weight: float) -> float:
    return min(WEIGHT_CEIL, max(WEIGHT_FLOOR, weight))


@dataclass
class ApplyReport:
    """What one application pass did: records consumed, edges touched,
    and records skipped because their edges no longer exist."""

    applied: int = 0
    adjusted_edges: int = 0
    skipped: list[tuple[int, str]] = field(default_factory=list)


def apply_feedback(
    snapshot: GraphSnapshot,
    log: FeedbackLog,
    *,
    eta: float = 0.1,
) -> tuple[GraphSnapshot, ApplyReport]:
    """Fold all log records newer than the snapshot's watermark into the
    edge weights.

    A record whose path references any missing edge is skipped whole
    (reported, not partially applied). With nothing pending the very
    same snapshot comes back, unchanged. Otherwise the result is a new
    snapshot with version + 1 and the watermark advanced to the last
    pending id. Applying twice is a no-op by construction.
    """
    if not 0.0 < eta < 1.0:
        raise FeedbackError(f"eta must lie in (0, 1), got {eta}")
    pending = log.pending(snapshot.feedback_watermark)
    report = ApplyReport()
    if not pending:
        return snapshot, report

    edges = dict(snapshot.edges)
    touched = 0
    for record in pending:
        if record.result_kind == "direct" or not record.path_edges:
            report.applied += 1
            continue
        missing = [key for key in record.path_edges if key not in edges]
        if missing:
            report.skipped.append(
                (record.id, f"edge {missing[0][0]} -- {missing[0][1]} no longer exists")
            )
            continue
        factor = feedback_multiplier(record.relevant, record.value_added, eta)
        for key in record.path_edges:
            edge = edges[key]
            new_weight = _clamp(edge.weight * factor)
            if new_weight != edge.weight:
                edges[key] = GraphEdge(
                    src=edge.src,
                    dst=edge.dst,
                    level=edge.level,
                    weight=new_weight,
                    provenance=edge.provenance,
                )
                touched += 1
        report.applied += 1

    report.adjusted_edges = touched
    updated = replace(
        snapshot,
        version=snapshot.version + 1,
        edges=edges,
        feedback_watermark=pending[-1].id,
        _adjacency={},
    )
    return updated, report


def rebuild_with_feedback(
    snapshot: GraphSnapshot,
    log: FeedbackLog,
    *,
    eta: float = 0.1,
) -> tuple[GraphSnapshot, float, ApplyReport]:
    """Rebuild the graph from the snapshot's own documents, then replay
    the entire feedback log against the fresh edges.

    Edges are re-resolved by their (src, dst) node-id pairs; judgments
    whose edges did not re-appear are skipped and reported. Returns the
    new snapshot, the rebuild wall time in seconds, and the replay
    report.
    """
    started = time.perf_counter()
    config = snapshot.config
    analysis = analyze_corpus(
        list(snapshot.docs.values()),
        gazetteer=snapshot.gazetteer,
        resources=snapshot.resources,
        n_max=config.n_max,
        classifier=ClassifierParams(
            specificity_frac=config.specificity_frac, min_count=config.min_count
        ),
    )
    fresh = build_graph(
        list(snapshot.docs.values()),
        snapshot.elements,
        analysis,
        config,
        prev_version=snapshot.version,
    )
    rebuilt, report = apply_feedback(fresh, log, eta=eta)
    # One rebuild is one version step, replay included; the watermark
    # must cover the whole log even when nothing applied.
    last = log.records[-1].id if log.records else 0
    if rebuilt.version != fresh.version or rebuilt.feedback_watermark != last:
        rebuilt = replace(rebuilt, version=fresh.version, feedback_watermark=last)
    seconds = time.perf_counter() - started
    return rebuilt, seconds, report
