"""Acceptance suite: one test per release criterion, each printing a
single PASS line with its runtime. Tolerances and time limits are fixed
here and are not to be loosened casually.

Independent oracles (reference TFIDF, exhaustive path enumeration) are
implemented in this file from scratch so a defect in the library cannot
hide in a shared helper.
"""

import math
import random
import time

from llgraph.assist import build_dictionary, suggest
from llgraph.evalkit import (
    build_synthetic_snapshot,
    compare_kpi,
    fixture_params,
    generate_synthetic_corpus,
)
from llgraph.feedback import FeedbackLog, apply_feedback, record_feedback
from llgraph.ingest import DesignCaseDoc
from llgraph.kgraph import (
    BuildConfig,
    GraphEdge,
    GraphNode,
    GraphSnapshot,
    add_document,
    build_graph,
    load_snapshot,
    save_snapshot,
)
from llgraph.search import (
    Query,
    SearchParams,
    direct_hits,
    expand_transitive,
    parse_query,
    run_search,
)
from llgraph.textmine import (
    DocAnalysis,
    GazetteerScanner,
    Resources,
    TokenStream,
    analyze_corpus,
    analyze_document,
    compute_tfidf,
)

TFIDF_TOLERANCE = 1e-9
PATH_COST_TOLERANCE = 1e-9
TFIDF_TIME_LIMIT = 5.0
PATH_TIME_LIMIT = 30.0
UPLIFT_TIME_LIMIT = 20.0
UPLIFT_FLOOR_PCT = 50.0


def _report(criterion, detail, seconds):
    print(f"PASS {criterion}: {detail} ({seconds:.2f}s)")


# --- criterion 1: tfidf against an independent oracle -------------------------


def _reference_tfidf(token_lists):
    n = len(token_lists)
    counts = []
    df = {}
    for tokens in token_lists:
        seen = {}
        for token in tokens:
            seen[token] = seen.get(token, 0) + 1
        counts.append(seen)
        for token in seen:
            df[token] = df.get(token, 0) + 1
    idf = {t: math.log((1 + n) / (1 + d)) + 1.0 for t, d in df.items()}
    vectors = []
    for seen in counts:
        raw = {t: (1.0 + math.log(c)) * idf[t] for t, c in seen.items()}
        norm = math.sqrt(sum(v * v for v in raw.values()))
        vectors.append({t: v / norm for t, v in raw.items()} if norm else {})
    return vectors, idf


def test_criterion_1_tfidf_matches_oracle():
    started = time.perf_counter()
    rng = random.Random(1001)
    vocabulary = [f"tok{i}" for i in range(40)]
    worst = 0.0
    for round_no in range(10):
        n_docs = rng.randint(1, 10)
        token_lists = [
            [rng.choice(vocabulary) for _ in range(rng.randint(1, 20))]
            for _ in range(n_docs)
        ]
        streams = [TokenStream(doc_id=f"d{i}", tokens=list(toks)) for i, toks in enumerate(token_lists)]
        vectors, stats = compute_tfidf(streams, n_max=1)
        expected_vectors, expected_idf = _reference_tfidf(token_lists)
        for vec, expected in zip(vectors, expected_vectors):
            assert set(vec.weights) == set(expected)
            for term, weight in vec.weights.items():
                delta = abs(weight - expected[term])
                worst = max(worst, delta)
                assert delta <= TFIDF_TOLERANCE, (round_no, term, delta)
        for term, st in stats.items():
            delta = abs(st.idf - expected_idf[term])
            worst = max(worst, delta)
            assert delta <= TFIDF_TOLERANCE
    elapsed = time.perf_counter() - started
    assert elapsed < TFIDF_TIME_LIMIT
    _report("criterion 1", f"tfidf equals oracle on 10 corpora, max |delta| {worst:.1e}", elapsed)


# --- criterion 2: path search against exhaustive enumeration ---------------------


def _enumerate_paths(snapshot, origin, params):
    adjacency = snapshot.adjacency()
    best = {origin: (0.0, (origin,), [])}

    def walk(seq, cost, edges):
        node = seq[-1]
        if len(seq) - 1 == params.max_hops:
            return
        for edge in adjacency.get(node, []):
            nbr = edge.other(node)
            if nbr in seq:
                continue
            nxt = cost + (1.0 - edge.weight) + params.beta
            if nxt > params.radius:
                continue
            nseq = seq + (nbr,)
            nedges = edges + [edge]
            cur = best.get(nbr)
            if cur is None or (nxt, nseq) < (cur[0], cur[1]):
                best[nbr] = (nxt, nseq, nedges)
            walk(nseq, nxt, nedges)

    walk((origin,), 0.0, [])
    return best


def _oracle_transitive(snapshot, origins, params):
    reached = {}
    for origin_id in sorted(origins):
        best = _enumerate_paths(snapshot, f"doc:{origin_id}", params)
        for node_id, (cost, seq, edges) in best.items():
            node = snapshot.nodes[node_id]
            if node.kind != "design_case" or node.payload_ref in origins:
                continue
            doc_id = node.payload_ref
            if doc_id not in reached or (cost, seq) < reached[doc_id][:2]:
                reached[doc_id] = (cost, seq, edges, origin_id)
    out = {}
    for doc_id, (cost, seq, edges, origin_id) in reached.items():
        score = origins[origin_id]
        for edge in edges:
            score *= edge.weight
        out[doc_id] = (cost, seq, edges, origin_id, score)
    return out


def _random_path_graph(rng):
    n = rng.randint(2, 30)
    nodes = {}
    for i in range(n):
        if rng.random() < 0.25:
            nid = f"term:t{i:02d}"
            nodes[nid] = GraphNode(id=nid, kind="term", label=nid[5:], payload_ref="")
        else:
            nid = f"doc:n{i:02d}"
            nodes[nid] = GraphNode(id=nid, kind="design_case", label=nid, payload_ref=nid[4:])
    ids = sorted(nodes)
    edges = {}
    for _ in range(rng.randint(1, 80)):
        a, b = rng.sample(ids, 2)
        edge = GraphEdge.make(a, b, level=1, weight=rng.uniform(0.05, 1.0))
        edges[edge.key] = edge
    config = BuildConfig()
    return GraphSnapshot(
        version=1, built_at="", config=config, config_hash=config.config_hash(),
        nodes=nodes, edges=edges, tfidf_index={}, term_stats={}, docs={}, elements={},
        gazetteer=(), resources=Resources.default(),
    )


def test_criterion_2_paths_match_exhaustive_oracle():
    started = time.perf_counter()
    rng = random.Random(2002)
    query = Query(raw="", tokens=[], vector={}, unknown_terms=[])
    param_grid = [
        SearchParams(radius=1.0, max_hops=3),
        SearchParams(radius=1.5, max_hops=4),
        SearchParams(radius=0.8, max_hops=4, beta=0.1),
        SearchParams(radius=1.2, max_hops=2, beta=0.0),
    ]
    total_reached = 0
    for round_no in range(100):
        snapshot = _random_path_graph(rng)
        params = param_grid[round_no % len(param_grid)]
        doc_ids = sorted(
            node.payload_ref for node in snapshot.nodes.values() if node.kind == "design_case"
        )
        origins = {d: rng.uniform(0.1, 1.0) for d in rng.sample(doc_ids, min(3, len(doc_ids)))}
        got = expand_transitive(query, origins, snapshot, params)
        want = _oracle_transitive(snapshot, origins, params)
        assert {r.doc_id for r in got} == set(want), f"round {round_no}: reached docs differ"
        total_reached += len(got)
        for result in got:
            cost = sum((1.0 - e.weight) + params.beta for e in result.path_edges)
            wcost, wseq, wedges, worigin, wscore = want[result.doc_id]
            assert abs(cost - wcost) <= PATH_COST_TOLERANCE, (round_no, result.doc_id)
            assert tuple(result.path_nodes) == wseq, f"round {round_no}: tie-break differs"
            assert result.path_edges == wedges
            assert result.origin == worigin
            assert result.score == wscore
    elapsed = time.perf_counter() - started
    assert elapsed < PATH_TIME_LIMIT
    _report(
        "criterion 2",
        f"transitive expansion equals exhaustive enumeration on 100 graphs ({total_reached} paths)",
        elapsed,
    )


# --- criterion 3: uplift floor on the bundled synthetic corpus ----------------------


def test_criterion_3_uplift_floor_and_ground_truth():
    started = time.perf_counter()
    params = fixture_params()
    corpus = generate_synthetic_corpus(params)
    assert len(corpus.queries) == 22
    chained_total = sum(len(q.chained_doc_ids) for q in corpus.queries)
    assert chained_total / len(corpus.docs) >= 0.4

    snapshot = build_synthetic_snapshot(corpus)
    search_params = SearchParams(limit=len(corpus.docs))

    missing = []
    for query in corpus.queries:
        outcome = run_search(snapshot, query.text, search_params)
        transitive = {r.doc_id for r in outcome.results if r.kind == "transitive"}
        for doc_id in query.chained_doc_ids:
            if doc_id not in transitive:
                missing.append((query.text, doc_id))
    assert missing == [], f"keyword-invisible docs not retrieved: {missing[:5]}"

    report = compare_kpi([q.text for q in corpus.queries], corpus.docs, snapshot, search_params)
    assert all(not row.flagged for row in report.rows)
    assert report.average_uplift_pct >= UPLIFT_FLOOR_PCT

    elapsed = time.perf_counter() - started
    assert elapsed < UPLIFT_TIME_LIMIT
    _report(
        "criterion 3",
        f"average uplift {report.average_uplift_pct:.0f}% over 22 queries, "
        f"{chained_total}/{chained_total} chained docs retrieved transitively",
        elapsed,
    )


# --- criterion 4: every suggestion retrieves something --------------------------------


def _misspell(rng, word):
    i = rng.randrange(len(word))
    kind = rng.randrange(4)
    if kind == 0 and len(word) > 3:
        return word[:i] + word[i + 1 :]
    if kind == 1 and i + 1 < len(word):
        return word[:i] + word[i + 1] + word[i] + word[i + 2 :]
    if kind == 2:
        return word[:i] + "x" + word[i + 1 :]
    return word[:i] + "q" + word[i:]


def test_criterion_4_suggestions_always_retrievable(snapshot):
    started = time.perf_counter()
    rng = random.Random(4004)
    synthetic = build_synthetic_snapshot(generate_synthetic_corpus(fixture_params()))

    violations = []
    checked = 0
    for snap in (snapshot, synthetic):
        dictionary = build_dictionary(snap)
        params = SearchParams()
        entries = sorted(dictionary.entries)
        probes = [_misspell(rng, t) for t in entries[:120]]
        probes += ["clok", "skwe", "regulatr", "bandgp"]
        for probe in probes:
            for suggestion in suggest(probe, dictionary):
                checked += 1
                query = parse_query(suggestion, snap)
                if not direct_hits(query, snap, params):
                    violations.append((probe, suggestion))
    assert checked > 0
    assert violations == [], f"{len(violations)} suggestions without hits: {violations[:5]}"
    elapsed = time.perf_counter() - started
    _report("criterion 4", f"{checked} suggestions checked, 0 without a direct hit", elapsed)


# --- criterion 5: explanations only cite real graph state ------------------------------


def test_criterion_5_explanations_are_sound(snapshot):
    started = time.perf_counter()
    synthetic_corpus = generate_synthetic_corpus(fixture_params())
    synthetic = build_synthetic_snapshot(synthetic_corpus)

    cases = [(snapshot, ["clock skew", "bandgap reference", "regulator", "ldo", "watchdog reset"])]
    cases.append((synthetic, [q.text for q in synthetic_corpus.queries]))

    violations = []
    checked = 0
    for snap, queries in cases:
        params = SearchParams(limit=len(snap.docs))
        for raw in queries:
            outcome = run_search(snap, raw, params)
            for result in outcome.results:
                checked += 1
                if result.explanation is None:
                    violations.append((raw, result.doc_id, "no explanation"))
                    continue
                if result.kind == "direct":
                    if result.path_nodes or result.path_edges:
                        violations.append((raw, result.doc_id, "direct result with a path"))
                    continue
                for edge in result.path_edges:
                    stored = snap.edges.get(edge.key)
                    if stored is None or stored.weight != edge.weight:
                        violations.append((raw, result.doc_id, f"edge {edge.key} not in snapshot"))
                for node_id in result.path_nodes:
                    if node_id not in snap.nodes:
                        violations.append((raw, result.doc_id, f"node {node_id} not in snapshot"))
    assert violations == [], violations[:5]
    elapsed = time.perf_counter() - started
    _report("criterion 5", f"{checked} results explained, 0 integrity violations", elapsed)


# --- criterion 6: the feedback loop, end to end ---------------------------------------


def test_criterion_6_feedback_loop(snapshot):
    started = time.perf_counter()
    outcome = run_search(snapshot, "clock skew", SearchParams(limit=50))
    result = next(r for r in outcome.results if r.kind == "transitive")

    log = FeedbackLog()
    record_feedback(
        log, snapshot,
        query_raw="clock skew", doc_id=result.doc_id, relevant=False,
        result_kind="transitive", path_edges=tuple(e.key for e in result.path_edges),
    )
    updated, report = apply_feedback(snapshot, log)
    assert report.applied == 1 and not report.skipped
    for edge in result.path_edges:
        assert updated.edges[edge.key].weight == edge.weight * 0.9, "exact 0.9 factor required"

    after = run_search(updated, "clock skew", SearchParams(limit=50))
    rescored = [r for r in after.results if r.doc_id == result.doc_id]
    if rescored:
        assert rescored[0].score <= result.score

    again, second = apply_feedback(updated, log)
    assert again is updated and second.applied == 0, "replay must be a no-op"
    elapsed = time.perf_counter() - started
    _report("criterion 6", "downweight exact, rank not improved, replay no-op", elapsed)


# --- criterion 7: persistence round trip ------------------------------------------------


def test_criterion_7_snapshot_round_trip(tmp_path, snapshot):
    started = time.perf_counter()
    empty = build_graph([], {}, analyze_corpus([]), BuildConfig())
    for name, snap in (("empty", empty), ("fixture", snapshot)):
        path = tmp_path / f"{name}.json"
        save_snapshot(snap, path)
        loaded = load_snapshot(path)
        assert loaded.logically_equal(snap), f"{name} snapshot changed across save/load"
    elapsed = time.perf_counter() - started
    _report("criterion 7", "empty and fixture snapshots round-trip logically equal", elapsed)


# --- criterion 8: incremental add ---------------------------------------------------------


def test_criterion_8_incremental_add(snapshot):
    started = time.perf_counter()
    doc = DesignCaseDoc(
        id="d-add1",
        title="Glorpitron interlock failure",
        failure_description="The glorpitron interlock failed closed during clock bringup.",
        cause="Contact bounce in the glorpitron relay.",
        solution="Debounced the interlock input.",
        project_path=["P1", "M1"],
    )
    scanner = GazetteerScanner(snapshot.gazetteer)
    stream, counts, mentions = analyze_document(doc, snapshot.resources, snapshot.config.n_max, scanner)
    analysis = DocAnalysis(doc_id=doc.id, stream=stream, term_counts=counts, entities=mentions)
    updated = add_document(snapshot, doc, analysis)

    # The new vocabulary is immediately searchable as a direct hit.
    outcome = run_search(updated, "glorpitron", SearchParams())
    direct = [r for r in outcome.results if r.kind == "direct"]
    assert [r.doc_id for r in direct] == ["d-add1"]

    # Level 3 edges follow the level 1/2 rules under the frozen idf.
    new_edges = {k: e for k, e in updated.edges.items() if k not in snapshot.edges}
    assert new_edges and all(e.level == 3 for e in new_edges.values())
    vec = updated.tfidf_index["d-add1"]
    for other_id, other_vec in snapshot.tfidf_index.items():
        sim = sum(w * other_vec.weights[t] for t, w in vec.weights.items() if t in other_vec.weights)
        key = tuple(sorted(("doc:d-add1", f"doc:{other_id}")))
        if sim >= snapshot.config.tau_sim:
            assert key in new_edges
            assert abs(new_edges[key].weight - sim) <= 1e-9
        else:
            assert key not in new_edges
    for term, weight in vec.weights.items():
        for nid in (f"term:{term}", f"ngram:{term}"):
            if nid in snapshot.nodes:
                key = tuple(sorted(("doc:d-add1", nid)))
                expected = min(snapshot.config.term_node_weight_cap, 2.0 * weight)
                assert abs(new_edges[key].weight - expected) <= 1e-9
                break
    for element in doc.project_path:
        key = tuple(sorted(("doc:d-add1", f"elem:{element}")))
        assert new_edges[key].weight == snapshot.config.project_edge_weight
    elapsed = time.perf_counter() - started
    _report("criterion 8", "added doc searchable, level 3 edges obey level 1/2 rules", elapsed)
