"""Query execution: direct hits by vector similarity or linking-node
match, transitive expansion by bounded cheapest paths, and an
explanation for every result.

Path search converts each edge weight w into a cost (1 - w) + beta, so
strong edges are cheap but every hop pays a fixed toll. Expansion runs
a hop-layered Dijkstra per origin document with the priority key
(cost, node-id sequence): ties on cost resolve to the lexicographically
smallest path, deterministically.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

from .kgraph import GraphEdge, GraphIntegrityError, GraphSnapshot, doc_node_id
from .textmine import TfidfVector, extract_ngrams, normalize


class EmptyQueryError(Exception):
    """Query contains no usable tokens, or none of its words are known.

    unknown_terms carries the tokens that missed the vocabulary so the
    caller can offer spelling suggestions.
    """

    def __init__(self, unknown_terms: list[str]):
        self.unknown_terms = unknown_terms
        detail = ", ".join(unknown_terms) if unknown_terms else "no tokens"
        super().__init__(f"query has no known terms ({detail})")


@dataclass(frozen=True)
class SearchParams:
    """Search-time knobs: query similarity floor, per-hop toll, radius
    of the path search, hop cap and result cap."""

    tau_q: float = 0.1
    beta: float = 0.05
    radius: float = 1.5
    max_hops: int = 4
    limit: int = 20

    def __post_init__(self) -> None:
        if not (0.0 < self.tau_q <= 1.0):
            raise ValueError(f"tau_q must lie in (0, 1], got {self.tau_q}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.radius <= 0.0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if self.max_hops < 1:
            raise ValueError(f"max_hops must be >= 1, got {self.max_hops}")
        if self.limit < 1:
            raise ValueError(f"limit must be >= 1, got {self.limit}")


@dataclass
class Query:
    """Parsed query: normalized tokens, TFIDF vector over the snapshot
    vocabulary, and the tokens the vocabulary does not know."""

    raw: str
    tokens: list[str]
    vector: dict[str, float]
    unknown_terms: list[str]


def parse_query(raw: str, snapshot: GraphSnapshot) -> Query:
    """Normalize the query with the snapshot's resources and weight it
    with the frozen corpus idf values.

    N-grams of query tokens that exist in the vocabulary join the
    vector; only unknown unigrams are reported as unknown. Raises
    EmptyQueryError when nothing remains or no unigram is known.
    """
    stream = normalize(raw, language="en", resources=snapshot.resources, doc_id="query")
    if not stream.tokens:
        raise EmptyQueryError([])

    unknown = [t for t in dict.fromkeys(stream.tokens) if t not in snapshot.term_stats]
    known_unigrams = [t for t in stream.tokens if t in snapshot.term_stats]
    if not known_unigrams:
        raise EmptyQueryError(unknown)

    counts = extract_ngrams(stream, snapshot.config.n_max)
    weights = {}
    for term, count in counts.items():
        st = snapshot.term_stats.get(term)
        if st is not None:
            weights[term] = (1.0 + math.log(count)) * st.idf
    norm = sum(w * w for w in weights.values()) ** 0.5
    if norm > 0:
        weights = {t: w / norm for t, w in weights.items()}

    return Query(raw=raw, tokens=stream.tokens, vector=weights, unknown_terms=unknown)


@dataclass
class SearchResult:
    """One ranked hit. Direct results have an empty path; transitive
    results carry the full node sequence and edges from an origin
    document to this one."""

    doc_id: str
    kind: str  # direct | transitive
    score: float
    origin: str
    path_nodes: list[str] = field(default_factory=list)
    path_edges: list[GraphEdge] = field(default_factory=list)
    explanation: "Explanation | None" = None


def _query_vector_similarity(query: Query, vec: TfidfVector) -> float:
    if not query.vector or not vec.weights:
        return 0.0
    return sum(w * vec.weights[t] for t, w in query.vector.items() if t in vec.weights)


def direct_hits(query: Query, snapshot: GraphSnapshot, params: SearchParams) -> dict[str, float]:
    """Documents matched by the query itself, with their scores.

    Rule (a): cosine between query vector and document vector >= tau_q.
    Rule (b): a query token (or the full normalized phrase) equals a
    linking node surface; every document adjacent to that node scores at
    least the connecting edge weight.
    """
    scores: dict[str, float] = {}
    for doc_id, vec in snapshot.tfidf_index.items():
        sim = _query_vector_similarity(query, vec)
        if sim >= params.tau_q:
            scores[doc_id] = sim

    probes = set(query.tokens)
    if len(query.tokens) > 1:
        probes.add(" ".join(query.tokens))
    for node in snapshot.nodes.values():
        if node.kind != "linking" or not (probes & set(node.surfaces)):
            continue
        for edge in snapshot.neighbors(node.id):
            other = snapshot.nodes[edge.other(node.id)]
            if other.kind != "design_case":
                continue
            doc_id = other.payload_ref
            if edge.weight > scores.get(doc_id, 0.0):
                scores[doc_id] = edge.weight
    return scores


def _bounded_dijkstra(
    snapshot: GraphSnapshot,
    origin_node: str,
    params: SearchParams,
) -> dict[str, tuple[float, tuple[str, ...], list[GraphEdge]]]:
    """Cheapest simple paths from one origin within radius and hop cap.

    States are (node, hops used); the heap is keyed by
    (cost, node-id sequence) so equal-cost paths settle in lexicographic
    order. The first time a node is popped in any layer its path is the
    minimum under that key. Costs accumulate left to right.
    """
    adjacency = snapshot.adjacency()
    best: dict[str, tuple[float, tuple[str, ...], list[GraphEdge]]] = {}
    settled: set[tuple[str, int]] = set()
    start: tuple[float, tuple[str, ...], int, list[GraphEdge]] = (0.0, (origin_node,), 0, [])
    heap = [start]
    while heap:
        cost, seq, hops, edges = heapq.heappop(heap)
        node = seq[-1]
        state = (node, hops)
        if state in settled:
            continue
        settled.add(state)
        if node not in best:
            best[node] = (cost, seq, edges)
        if hops == params.max_hops:
            continue
        for edge in adjacency.get(node, []):
            nbr = edge.other(node)
            if nbr in seq:
                continue
            nxt = cost + (1.0 - edge.weight) + params.beta
            if nxt > params.radius:
                continue
            heapq.heappush(heap, (nxt, seq + (nbr,), hops + 1, edges + [edge]))
    return best


def expand_transitive(
    query: Query,
    origins: dict[str, float],
    snapshot: GraphSnapshot,
    params: SearchParams,
) -> list[SearchResult]:
    """Reach further documents over cheapest bounded paths.

    Every direct hit seeds a path search; a reached document keeps the
    best (cost, path) over all origins and scores
    origin_score * product of edge weights along the path. Documents
    that are already direct hits are not re-reported.
    """
    reached: dict[str, tuple[tuple[float, tuple[str, ...]], str, list[GraphEdge]]] = {}
    for origin_id in sorted(origins):
        paths = _bounded_dijkstra(snapshot, doc_node_id(origin_id), params)
        for node_id, (cost, seq, edges) in paths.items():
            node = snapshot.nodes[node_id]
            if node.kind != "design_case" or node.payload_ref in origins:
                continue
            key = (cost, seq)
            doc_id = node.payload_ref
            if doc_id not in reached or key < reached[doc_id][0]:
                reached[doc_id] = (key, origin_id, edges)

    results = []
    for doc_id, ((_cost, seq), origin_id, edges) in reached.items():
        score = origins[origin_id]
        for edge in edges:
            score *= edge.weight
        results.append(
            SearchResult(
                doc_id=doc_id,
                kind="transitive",
                score=score,
                origin=origin_id,
                path_nodes=list(seq),
                path_edges=edges,
            )
        )
    return results


def rank_results(
    direct: dict[str, float],
    transitive: list[SearchResult],
    params: SearchParams,
) -> list[SearchResult]:
    """Direct hits first (score desc, id asc), then transitive hits in
    the same order, truncated to the result cap."""
    ranked = [
        SearchResult(doc_id=doc_id, kind="direct", score=score, origin=doc_id)
        for doc_id, score in sorted(direct.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    ranked.extend(sorted(transitive, key=lambda r: (-r.score, r.doc_id)))
    return ranked[: params.limit]


@dataclass
class Explanation:
    """Human-readable justification of one result, with the machine
    evidence that backs each sentence."""

    template_id: str
    text: str
    evidence: dict


def _direct_explanation(result: SearchResult, snapshot: GraphSnapshot, query: Query) -> Explanation:
    vec = snapshot.tfidf_index[result.doc_id]
    matched = [t for t in dict.fromkeys(query.tokens) if t in vec.weights]
    if matched:
        return Explanation(
            template_id="direct_match",
            text="matched your query terms: " + ", ".join(matched),
            evidence={"terms": matched},
        )

    # Vector overlap may be entirely n-grams, or the hit came from a
    # linking-node surface; name the strongest connecting node instead.
    probes = set(query.tokens)
    if len(query.tokens) > 1:
        probes.add(" ".join(query.tokens))
    dn = doc_node_id(result.doc_id)
    best: tuple[float, str, GraphEdge] | None = None
    for edge in snapshot.neighbors(dn):
        node = snapshot.nodes[edge.other(dn)]
        if node.kind != "linking" or not (probes & set(node.surfaces)):
            continue
        if best is None or edge.weight > best[0]:
            best = (edge.weight, node.linking_kind or "term", edge)
    if best is not None:
        weight, kind, edge = best
        node = snapshot.nodes[edge.other(dn)]
        if kind == "entity":
            return Explanation(
                template_id="direct_match",
                text=f"matched domain entity '{node.label}'",
                evidence={"entity": node.label},
            )
        if kind == "ngram":
            return Explanation(
                template_id="direct_match",
                text=f"matched phrase '{node.label}'",
                evidence={"phrase": node.label},
            )
        return Explanation(
            template_id="direct_match",
            text=f"matched term '{node.label}'",
            evidence={"term": node.label},
        )

    shared = sorted(set(query.vector) & set(vec.weights))
    return Explanation(
        template_id="direct_match",
        text="matched your query terms: " + ", ".join(shared),
        evidence={"terms": shared},
    )


def _clause_for(node_id: str, snapshot: GraphSnapshot, result: SearchResult) -> tuple[str, dict]:
    node = snapshot.nodes[node_id]
    if node.kind == "design_case":
        title = snapshot.docs[node.payload_ref].title or node.payload_ref
        return f"via the related report '{title}'", {"via_doc": node.payload_ref}
    if node.kind == "project_element":
        return f"from the same project area '{node.label}'", {"element": node.payload_ref}
    if node.linking_kind == "entity":
        return f"both mention the entity '{node.label}'", {"entity": node.label}
    if node.linking_kind == "ngram":
        return f"both use the phrase '{node.label}'", {"phrase": node.label}
    return f"both use the term '{node.label}'", {"term": node.label}


def _transitive_explanation(result: SearchResult, snapshot: GraphSnapshot) -> Explanation:
    for edge in result.path_edges:
        if edge.key not in snapshot.edges:
            raise GraphIntegrityError(f"path edge {edge.key} not in snapshot")

    origin_doc = snapshot.docs[result.origin]
    origin_name = origin_doc.title or result.origin
    intermediates = result.path_nodes[1:-1]

    if not intermediates:
        # One-hop document-to-document link: cite the shared terms the
        # similarity edge was built from.
        edge = result.path_edges[0]
        terms = list(edge.provenance)
        text = f"linked to your hit '{origin_name}' through shared vocabulary"
        if terms:
            text += ": " + ", ".join(terms)
        return Explanation(
            template_id="shared_linking",
            text=text,
            evidence={"origin": result.origin, "terms": terms},
        )

    kinds = {snapshot.nodes[n].kind for n in intermediates}
    if "design_case" in kinds:
        template = "via_document"
    elif "project_element" in kinds:
        template = "same_module"
    else:
        template = "shared_linking"

    clauses = []
    evidence: dict = {"origin": result.origin, "links": []}
    for node_id in intermediates[:3]:
        clause, item = _clause_for(node_id, snapshot, result)
        clauses.append(clause)
        evidence["links"].append(item)
    extra = len(intermediates) - 3
    if extra > 0:
        clauses.append(f"and {extra} further links")

    text = f"reached from your hit '{origin_name}' " + ", ".join(clauses)
    return Explanation(template_id=template, text=text, evidence=evidence)


def explain(result: SearchResult, snapshot: GraphSnapshot, query: Query) -> Explanation:
    """Build the explanation for one result.

    Direct results name what matched; transitive results walk the path
    and produce one clause per intermediate node (at most three, then a
    count). Raises GraphIntegrityError if a path edge is missing from
    the snapshot.
    """
    if result.kind == "direct":
        return _direct_explanation(result, snapshot, query)
    return _transitive_explanation(result, snapshot)


@dataclass
class Subgraph:
    """The neighborhood to draw: result and connector nodes plus the
    pseudo query node, with tags telling the renderer what each is."""

    nodes: list[dict]
    edges: list[dict]

    def to_payload(self) -> dict:
        return {"nodes": self.nodes, "edges": self.edges}


def extract_subgraph(query: Query, results: Sequence[SearchResult], snapshot: GraphSnapshot) -> Subgraph:
    """Collect every node and edge involved in the result set.

    A pseudo node (id "query") anchors the picture; direct hits hang off
    it with pseudo-edges weighted by their score. Path nodes that are
    not results are tagged "connector".
    """
    tags: dict[str, str] = {}
    edge_map: dict[tuple[str, str], dict] = {}

    def tag(node_id: str, value: str) -> None:
        if value in ("direct", "transitive"):
            tags[node_id] = value
        else:
            tags.setdefault(node_id, value)

    for result in results:
        dn = doc_node_id(result.doc_id)
        tag(dn, result.kind)
        if result.kind == "direct":
            edge_map[("query", dn)] = {
                "src": "query",
                "dst": dn,
                "level": "query",
                "weight": result.score,
                "provenance": [],
            }
        for node_id in result.path_nodes:
            tag(node_id, "connector")
        for edge in result.path_edges:
            edge_map[edge.key] = {
                "src": edge.src,
                "dst": edge.dst,
                "level": edge.level,
                "weight": edge.weight,
                "provenance": list(edge.provenance),
            }

    nodes = [{"id": "query", "kind": "query", "tag": "query", "label": query.raw}]
    for node_id in sorted(tags):
        node = snapshot.nodes[node_id]
        nodes.append({"id": node.id, "kind": node.kind, "tag": tags[node_id], "label": node.label})
    nodes.sort(key=lambda n: (n["kind"], n["id"]))
    edges = sorted(edge_map.values(), key=lambda e: (e["src"], e["dst"], str(e["level"])))
    return Subgraph(nodes=nodes, edges=edges)


@dataclass
class SearchOutcome:
    """Everything one query produces: parsed query, explained results,
    and the drawable subgraph."""

    query: Query
    results: list[SearchResult]
    subgraph: Subgraph


def run_search(snapshot: GraphSnapshot, raw: str, params: SearchParams | None = None) -> SearchOutcome:
    """Parse, match, expand, rank and explain in one call."""
    params = params or SearchParams()
    query = parse_query(raw, snapshot)
    origins = direct_hits(query, snapshot, params)
    transitive = expand_transitive(query, origins, snapshot, params) if origins else []
    results = rank_results(origins, transitive, params)
    for result in results:
        result.explanation = explain(result, snapshot, query)
    return SearchOutcome(query=query, results=results, subgraph=extract_subgraph(query, results, snapshot))
