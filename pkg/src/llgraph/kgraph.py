"""The knowledge graph: nodes for documents, project elements and
linking vocabulary; weighted undirected edges on three levels.

Level 1 connects documents whose TFIDF vectors are similar enough,
level 2 connects documents to the linking nodes and project elements
they mention, level 3 marks edges contributed by documents added after
the initial build. Snapshots are immutable value objects; every update
produces a new snapshot with a bumped version.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .ingest import DesignCaseDoc, ProjectElement
from .textmine import (
    CorpusAnalysis,
    DocAnalysis,
    GazetteerEntry,
    Resources,
    TermStats,
    TfidfVector,
    normalize,
)

SNAPSHOT_FORMAT = "llgraph-snapshot"

NODE_KINDS = ("design_case", "project_element", "linking")
LINKING_KINDS = ("term", "ngram", "entity")
EDGE_LEVELS = (1, 2, 3)


def doc_node_id(doc_id: str) -> str:
    return f"doc:{doc_id}"


def element_node_id(element_id: str) -> str:
    return f"elem:{element_id}"


def term_node_id(term: str) -> str:
    return f"term:{term}"


def ngram_node_id(ngram: str) -> str:
    return f"ngram:{ngram}"


def entity_node_id(canonical: str) -> str:
    return f"entity:{canonical.lower()}"


@dataclass(frozen=True)
class GraphNode:
    """One graph node. surfaces lists the normalized strings a query
    token may hit to reach a linking node directly."""

    id: str
    kind: str  # design_case | project_element | linking
    label: str
    payload_ref: str = ""
    linking_kind: str | None = None  # term | ngram | entity
    surfaces: tuple[str, ...] = ()


@dataclass(frozen=True)
class GraphEdge:
    """Undirected weighted edge, stored once with src < dst."""

    src: str
    dst: str
    level: int
    weight: float
    provenance: tuple[str, ...] = ()

    @classmethod
    def make(
        cls,
        a: str,
        b: str,
        level: int,
        weight: float,
        provenance: Iterable[str] = (),
    ) -> "GraphEdge":
        if a == b:
            raise ValueError(f"self-loop on {a!r}")
        if level not in EDGE_LEVELS:
            raise ValueError(f"edge level must be one of {EDGE_LEVELS}, got {level}")
        if not (0.0 < weight <= 1.0):
            raise ValueError(f"edge weight must lie in (0, 1], got {weight}")
        src, dst = (a, b) if a < b else (b, a)
        return cls(src=src, dst=dst, level=level, weight=weight, provenance=tuple(provenance))

    @property
    def key(self) -> tuple[str, str]:
        return (self.src, self.dst)

    def other(self, node_id: str) -> str:
        return self.dst if node_id == self.src else self.src


class GraphIntegrityError(Exception):
    """Raised when an operation would corrupt the graph (duplicate doc,
    dangling reference, malformed edge)."""


class SnapshotLoadError(Exception):
    """Raised when a persisted snapshot cannot be read back."""


@dataclass(frozen=True)
class BuildConfig:
    """All knobs of graph construction. The hash of the canonical JSON
    form is stored on every snapshot so mismatched configs are visible."""

    tau_sim: float = 0.15
    entity_weight: float = 0.9
    project_edge_weight: float = 0.8
    term_node_weight_cap: float = 0.7
    n_max: int = 3
    specificity_frac: float = 0.2
    min_count: int = 2

    def __post_init__(self) -> None:
        for name in ("tau_sim", "entity_weight", "project_edge_weight", "term_node_weight_cap"):
            value = getattr(self, name)
            if not (0.0 < value <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {value}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        if not (0.0 < self.specificity_frac <= 1.0):
            raise ValueError(f"specificity_frac must lie in (0, 1], got {self.specificity_frac}")
        if self.min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {self.min_count}")

    def to_dict(self) -> dict:
        return {
            "tau_sim": self.tau_sim,
            "entity_weight": self.entity_weight,
            "project_edge_weight": self.project_edge_weight,
            "term_node_weight_cap": self.term_node_weight_cap,
            "n_max": self.n_max,
            "specificity_frac": self.specificity_frac,
            "min_count": self.min_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BuildConfig":
        return cls(**data)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def doc_similarity(a: TfidfVector, b: TfidfVector) -> float:
    """Cosine similarity of two unit vectors: their sparse dot product."""
    if not a.weights or not b.weights:
        return 0.0
    small, large = (a.weights, b.weights) if len(a.weights) <= len(b.weights) else (b.weights, a.weights)
    return sum(w * large[t] for t, w in small.items() if t in large)


@dataclass(frozen=True)
class GraphSnapshot:
    """Immutable state of the engine at one version.

    Carries everything needed to serve, extend and rebuild: the graph
    itself, the TFIDF index, term statistics, the source documents and
    project forest, language resources, gazetteer and config.
    feedback_watermark is the id of the last feedback record already
    folded into the edge weights.
    """

    version: int
    built_at: str
    config: BuildConfig
    config_hash: str
    nodes: dict[str, GraphNode]
    edges: dict[tuple[str, str], GraphEdge]
    tfidf_index: dict[str, TfidfVector]
    term_stats: dict[str, TermStats]
    docs: dict[str, DesignCaseDoc]
    elements: dict[str, ProjectElement]
    gazetteer: tuple[GazetteerEntry, ...]
    resources: Resources
    feedback_watermark: int = 0
    _adjacency: dict = field(default_factory=dict, repr=False, compare=False)

    def adjacency(self) -> dict[str, list[GraphEdge]]:
        """Node id -> incident edges, built lazily and cached."""
        if not self._adjacency and self.edges:
            adj: dict[str, list[GraphEdge]] = {}
            for edge in self.edges.values():
                adj.setdefault(edge.src, []).append(edge)
                adj.setdefault(edge.dst, []).append(edge)
            # Deterministic neighbor order regardless of insertion order.
            for edges in adj.values():
                edges.sort(key=lambda e: e.key)
            self._adjacency.update(adj)
        return self._adjacency

    def neighbors(self, node_id: str) -> list[GraphEdge]:
        return self.adjacency().get(node_id, [])

    def logically_equal(self, other: "GraphSnapshot") -> bool:
        """Equality over persisted state (cache fields excluded)."""
        return (
            self.version == other.version
            and self.built_at == other.built_at
            and self.config == other.config
            and self.config_hash == other.config_hash
            and self.nodes == other.nodes
            and self.edges == other.edges
            and {k: (v.doc_id, v.weights, v.norm) for k, v in self.tfidf_index.items()}
            == {k: (v.doc_id, v.weights, v.norm) for k, v in other.tfidf_index.items()}
            and self.term_stats == other.term_stats
            and self.docs == other.docs
            and self.elements == other.elements
            and self.gazetteer == other.gazetteer
            and self.resources == other.resources
            and self.feedback_watermark == other.feedback_watermark
        )


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _linking_vocabulary(analysis: CorpusAnalysis) -> tuple[set[str], set[str]]:
    """Split the linking vocabulary into unigram terms and n-grams.

    Technical unigrams become term nodes. N-grams qualify when they are
    technical themselves or recur across documents (df >= 2).
    """
    terms: set[str] = set()
    ngrams: set[str] = set()
    for term in analysis.technical_terms:
        (ngrams if " " in term else terms).add(term)
    for term, st in analysis.stats.items():
        if " " in term and st.df >= 2:
            ngrams.add(term)
    return terms, ngrams


def _entity_surfaces(entry: GazetteerEntry, resources: Resources) -> tuple[str, ...]:
    # Surfaces are stored normalized the same way queries are, so that
    # token and phrase probes compare equal strings.
    surfaces = []
    for form in entry.all_forms():
        key = " ".join(normalize(form, resources=resources).tokens)
        if key and key not in surfaces:
            surfaces.append(key)
    return tuple(surfaces)


def _top_shared_terms(a: TfidfVector, b: TfidfVector, k: int = 5) -> tuple[str, ...]:
    shared = set(a.weights) & set(b.weights)
    ranked = sorted(shared, key=lambda t: (-min(a.weights[t], b.weights[t]), t))
    return tuple(ranked[:k])


def build_graph(
    docs: Sequence[DesignCaseDoc],
    forest: dict[str, ProjectElement],
    analysis: CorpusAnalysis,
    config: BuildConfig | None = None,
    *,
    prev_version: int = 0,
) -> GraphSnapshot:
    """Construct a snapshot from scratch.

    Level 1: document pairs with cosine >= tau_sim, weight = cosine,
    provenance = up to five strongest shared terms. Level 2: document to
    linking node (term/ngram weight = min(cap, 2 * tfidf weight), entity
    weight from the gazetteer) and document to every element on its
    project path (fixed project_edge_weight).
    """
    config = config or BuildConfig()

    nodes: dict[str, GraphNode] = {}
    edges: dict[tuple[str, str], GraphEdge] = {}

    def put_edge(edge: GraphEdge) -> None:
        edges[edge.key] = edge

    for doc in docs:
        nid = doc_node_id(doc.id)
        if nid in nodes:
            raise GraphIntegrityError(f"duplicate document {doc.id!r}")
        nodes[nid] = GraphNode(id=nid, kind="design_case", label=doc.title or doc.id, payload_ref=doc.id)

    for el in forest.values():
        nodes[element_node_id(el.id)] = GraphNode(
            id=element_node_id(el.id), kind="project_element", label=el.name, payload_ref=el.id
        )

    term_vocab, ngram_vocab = _linking_vocabulary(analysis)
    for term in term_vocab:
        nid = term_node_id(term)
        nodes[nid] = GraphNode(id=nid, kind="linking", label=term, linking_kind="term", surfaces=(term,))
    for ngram in ngram_vocab:
        nid = ngram_node_id(ngram)
        nodes[nid] = GraphNode(id=nid, kind="linking", label=ngram, linking_kind="ngram", surfaces=(ngram,))

    mentioned = {m.canonical for ms in analysis.entities.values() for m in ms}
    entries_by_canonical = {}
    for entry in analysis.gazetteer:
        entries_by_canonical.setdefault(entry.canonical, entry)
    for canonical in mentioned:
        entry = entries_by_canonical[canonical]
        nid = entity_node_id(canonical)
        nodes[nid] = GraphNode(
            id=nid,
            kind="linking",
            label=canonical,
            payload_ref=entry.category,
            linking_kind="entity",
            surfaces=_entity_surfaces(entry, analysis.resources),
        )

    # Level 1: pairwise document similarity.
    ordered = [d.id for d in docs]
    for i, id_a in enumerate(ordered):
        va = analysis.vectors[id_a]
        for id_b in ordered[i + 1 :]:
            vb = analysis.vectors[id_b]
            sim = doc_similarity(va, vb)
            if sim >= config.tau_sim:
                put_edge(
                    GraphEdge.make(
                        doc_node_id(id_a),
                        doc_node_id(id_b),
                        level=1,
                        weight=min(sim, 1.0),
                        provenance=_top_shared_terms(va, vb),
                    )
                )

    # Level 2: document -> linking vocabulary and project elements.
    for doc in docs:
        vec = analysis.vectors[doc.id]
        dn = doc_node_id(doc.id)
        for term, weight in vec.weights.items():
            if term in term_vocab:
                nid = term_node_id(term)
            elif term in ngram_vocab:
                nid = ngram_node_id(term)
            else:
                continue
            put_edge(GraphEdge.make(dn, nid, level=2, weight=min(config.term_node_weight_cap, 2.0 * weight)))
        for canonical in {m.canonical for m in analysis.entities.get(doc.id, [])}:
            entry = entries_by_canonical[canonical]
            put_edge(GraphEdge.make(dn, entity_node_id(canonical), level=2, weight=entry.weight))
        for element_id in doc.project_path:
            if element_id not in forest:
                raise GraphIntegrityError(f"doc {doc.id!r} references unknown element {element_id!r}")
            put_edge(GraphEdge.make(dn, element_node_id(element_id), level=2, weight=config.project_edge_weight))

    return GraphSnapshot(
        version=prev_version + 1,
        built_at=_now(),
        config=config,
        config_hash=config.config_hash(),
        nodes=nodes,
        edges=edges,
        tfidf_index={v.doc_id: v for v in analysis.vectors.values()},
        term_stats=dict(analysis.stats),
        docs={d.id: d for d in docs},
        elements=dict(forest),
        gazetteer=tuple(analysis.gazetteer),
        resources=analysis.resources,
    )


def add_document(snapshot: GraphSnapshot, doc: DesignCaseDoc, analysis: DocAnalysis) -> GraphSnapshot:
    """Fold one new document into an existing snapshot without a rebuild.

    Term statistics stay frozen: the new document is weighted with the
    existing idf values, unseen terms get the maximal idf ln(1+N) + 1 and
    a fresh stats entry (df 1). All resulting edges are level 3 and only
    reach nodes that already exist; no new linking nodes are minted.
    """
    if doc.id in snapshot.docs:
        raise GraphIntegrityError(f"document {doc.id!r} already in snapshot")
    for element_id in doc.project_path:
        if element_id not in snapshot.elements:
            raise GraphIntegrityError(f"doc {doc.id!r} references unknown element {element_id!r}")

    n_docs = len(snapshot.tfidf_index)
    fallback_idf = math.log(1 + n_docs) + 1.0

    new_stats = dict(snapshot.term_stats)
    weights = {}
    for term, count in analysis.term_counts.items():
        st = snapshot.term_stats.get(term)
        if st is None:
            st = TermStats(term=term, df=1, total_count=count, idf=fallback_idf)
            new_stats[term] = st
        weights[term] = (1.0 + math.log(count)) * st.idf
    norm = math.sqrt(sum(w * w for w in weights.values()))
    if norm > 0:
        weights = {t: w / norm for t, w in weights.items()}
    vec = TfidfVector(doc_id=doc.id, weights=weights, norm=norm)

    nodes = dict(snapshot.nodes)
    dn = doc_node_id(doc.id)
    nodes[dn] = GraphNode(id=dn, kind="design_case", label=doc.title or doc.id, payload_ref=doc.id)

    edges = dict(snapshot.edges)

    config = snapshot.config
    for other_id, other_vec in snapshot.tfidf_index.items():
        sim = doc_similarity(vec, other_vec)
        if sim >= config.tau_sim:
            edge = GraphEdge.make(
                dn,
                doc_node_id(other_id),
                level=3,
                weight=min(sim, 1.0),
                provenance=_top_shared_terms(vec, other_vec),
            )
            edges[edge.key] = edge

    for term, weight in vec.weights.items():
        for nid in (term_node_id(term), ngram_node_id(term)):
            if nid in nodes:
                edge = GraphEdge.make(dn, nid, level=3, weight=min(config.term_node_weight_cap, 2.0 * weight))
                edges[edge.key] = edge
                break

    scanner_hits = {m.canonical for m in analysis.entities}
    for canonical in scanner_hits:
        nid = entity_node_id(canonical)
        if nid not in nodes:
            continue
        entry = next(e for e in snapshot.gazetteer if e.canonical == canonical)
        edge = GraphEdge.make(dn, nid, level=3, weight=entry.weight)
        edges[edge.key] = edge

    for element_id in doc.project_path:
        edge = GraphEdge.make(dn, element_node_id(element_id), level=3, weight=config.project_edge_weight)
        edges[edge.key] = edge

    docs = dict(snapshot.docs)
    docs[doc.id] = doc
    index = dict(snapshot.tfidf_index)
    index[doc.id] = vec

    return replace(
        snapshot,
        version=snapshot.version + 1,
        built_at=_now(),
        nodes=nodes,
        edges=edges,
        tfidf_index=index,
        term_stats=new_stats,
        docs=docs,
        _adjacency={},
    )


def _snapshot_body(snapshot: GraphSnapshot) -> dict:
    return {
        "version": snapshot.version,
        "built_at": snapshot.built_at,
        "config": snapshot.config.to_dict(),
        "config_hash": snapshot.config_hash,
        "feedback_watermark": snapshot.feedback_watermark,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind,
                "label": n.label,
                "payload_ref": n.payload_ref,
                "linking_kind": n.linking_kind,
                "surfaces": list(n.surfaces),
            }
            for n in sorted(snapshot.nodes.values(), key=lambda n: n.id)
        ],
        "edges": [
            {
                "src": e.src,
                "dst": e.dst,
                "level": e.level,
                "weight": e.weight,
                "provenance": list(e.provenance),
            }
            for e in sorted(snapshot.edges.values(), key=lambda e: e.key)
        ],
        "tfidf_index": [
            {"doc_id": v.doc_id, "weights": v.weights, "norm": v.norm}
            for v in sorted(snapshot.tfidf_index.values(), key=lambda v: v.doc_id)
        ],
        "term_stats": [
            {"term": s.term, "df": s.df, "total_count": s.total_count, "idf": s.idf}
            for s in sorted(snapshot.term_stats.values(), key=lambda s: s.term)
        ],
        "docs": [snapshot.docs[k].to_dict() for k in sorted(snapshot.docs)],
        "elements": [snapshot.elements[k].to_dict() for k in sorted(snapshot.elements)],
        "gazetteer": [
            {
                "category": g.category,
                "canonical": g.canonical,
                "surface_forms": list(g.surface_forms),
                "weight": g.weight,
            }
            for g in snapshot.gazetteer
        ],
        "resources": snapshot.resources.to_dict(),
    }


def save_snapshot(snapshot: GraphSnapshot, path: str | Path) -> None:
    """Serialize to JSON with a checksum envelope; the write is atomic
    (temp file in the target directory, then rename)."""
    body = _snapshot_body(snapshot)
    body_text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    envelope = {
        "format": SNAPSHOT_FORMAT,
        "checksum": hashlib.sha256(body_text.encode("utf-8")).hexdigest(),
        "snapshot": body,
    }
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(envelope, fh, sort_keys=True, separators=(",", ":"))
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def load_snapshot(path: str | Path) -> GraphSnapshot:
    """Read a snapshot back, verifying format marker and checksum."""
    try:
        envelope = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotLoadError(f"cannot read snapshot {path}: {exc}") from exc

    if not isinstance(envelope, dict) or envelope.get("format") != SNAPSHOT_FORMAT:
        raise SnapshotLoadError(f"{path} is not a graph snapshot")
    body = envelope.get("snapshot")
    if not isinstance(body, dict):
        raise SnapshotLoadError(f"{path}: snapshot body missing")
    body_text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(body_text.encode("utf-8")).hexdigest()
    if digest != envelope.get("checksum"):
        raise SnapshotLoadError(f"{path}: checksum mismatch, file corrupted")

    try:
        nodes = {
            n["id"]: GraphNode(
                id=n["id"],
                kind=n["kind"],
                label=n["label"],
                payload_ref=n.get("payload_ref", ""),
                linking_kind=n.get("linking_kind"),
                surfaces=tuple(n.get("surfaces") or ()),
            )
            for n in body["nodes"]
        }
        edges = {}
        for e in body["edges"]:
            edge = GraphEdge.make(e["src"], e["dst"], level=e["level"], weight=e["weight"], provenance=e.get("provenance") or ())
            edges[edge.key] = edge
        snapshot = GraphSnapshot(
            version=body["version"],
            built_at=body["built_at"],
            config=BuildConfig.from_dict(body["config"]),
            config_hash=body["config_hash"],
            nodes=nodes,
            edges=edges,
            tfidf_index={
                v["doc_id"]: TfidfVector(doc_id=v["doc_id"], weights=v["weights"], norm=v["norm"])
                for v in body["tfidf_index"]
            },
            term_stats={
                s["term"]: TermStats(term=s["term"], df=s["df"], total_count=s["total_count"], idf=s["idf"])
                for s in body["term_stats"]
            },
            docs={d["id"]: DesignCaseDoc.from_dict(d) for d in body["docs"]},
            elements={e["id"]: ProjectElement.from_dict(e) for e in body["elements"]},
            gazetteer=tuple(
                GazetteerEntry(
                    category=g["category"],
                    canonical=g["canonical"],
                    surface_forms=tuple(g.get("surface_forms") or ()),
                    weight=g.get("weight", 0.9),
                )
                for g in body["gazetteer"]
            ),
            resources=Resources.from_dict(body.get("resources") or {}),
            feedback_watermark=body.get("feedback_watermark", 0),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotLoadError(f"{path}: malformed snapshot: {exc}") from exc

    if snapshot.config.config_hash() != snapshot.config_hash:
        raise SnapshotLoadError(f"{path}: config hash mismatch")
    return snapshot
