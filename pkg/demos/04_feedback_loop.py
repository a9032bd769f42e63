"""
Closing the loop with user feedback
===================================

Judgments from the result list steer the graph: a not-relevant mark
weakens every edge on the path that produced the result, a high
value-added mark strengthens it. The log is append-only and replaying
already-applied records changes nothing.
"""

from pathlib import Path

from llgraph import (
    BuildConfig,
    FeedbackLog,
    Resources,
    SearchParams,
    analyze_corpus,
    apply_feedback,
    build_graph,
    load_abbreviations,
    load_gazetteer,
    parse_documents,
    parse_project_tree,
    record_feedback,
    run_search,
)

# Same pipeline as 01_build_graph.py, condensed.
DATA = Path(__file__).parent / "data"
docs, _ = parse_documents(DATA / "docs.jsonl")
forest, _ = parse_project_tree(DATA / "project_tree.json")
gazetteer = load_gazetteer(DATA / "gazetteer.json")
resources = Resources.default()
resources.abbreviations.update(load_abbreviations(DATA / "abbreviations.json"))
analysis = analyze_corpus(docs, gazetteer=gazetteer, resources=resources)
snapshot = build_graph(docs, forest, analysis, BuildConfig(tau_sim=0.04))
titles = {d.id: d.title for d in docs}

params = SearchParams(radius=1.8)
query = "clock skew"


def transitive_scores(snap):
    outcome = run_search(snap, query, params)
    return {r.doc_id: r for r in outcome.results if r.kind == "transitive"}


before = transitive_scores(snapshot)
print(f"transitive results for {query!r} before feedback:")
for doc_id, result in sorted(before.items(), key=lambda kv: -kv[1].score):
    print(f"  {result.score:.3f}  {doc_id}  {titles[doc_id]}")

# The engineer judges two of them: the bandgap report does not help a
# clock question, the PLL report solved it outright.
log = FeedbackLog()
down = before["ll-004"]
up = before["ll-003"]
record_feedback(
    log, snapshot, query_raw=query, doc_id="ll-004", relevant=False,
    result_kind="transitive", path_edges=tuple(e.key for e in down.path_edges),
)
record_feedback(
    log, snapshot, query_raw=query, doc_id="ll-003", relevant=True, value_added=5,
    result_kind="transitive", path_edges=tuple(e.key for e in up.path_edges),
)

# Apply: not-relevant scales its path edges by 0.9, the five-star
# judgment scales its own by 1.1. Weights stay inside (0, 1).
updated, report = apply_feedback(snapshot, log)
changed = [k for k, e in updated.edges.items() if e.weight != snapshot.edges[k].weight]
print(f"\napplied {report.applied} judgments: {report.adjusted_edges} adjustments "
      f"on {len(changed)} edges (both paths start with the same hop)")
for key in changed:
    print(f"  {key[0]} -- {key[1]}: {snapshot.edges[key].weight:.3f} -> {updated.edges[key].weight:.3f}")

# The endorsed report now outranks the rejected one. Scores of results
# that merely shared the weakened first hop move too: the path search
# re-routes them through the second direct hit, which is cheaper now.
after = transitive_scores(updated)
print(f"\ntransitive results for {query!r} after feedback:")
for doc_id, result in sorted(after.items(), key=lambda kv: -kv[1].score):
    print(f"  {result.score:.3f}  {doc_id}  {titles[doc_id]}  (was {before[doc_id].score:.3f})")

# Replaying the same log is a no-op: the snapshot remembers the highest
# record id it has seen and ignores everything at or below it.
same, second = apply_feedback(updated, log)
print(f"\nreplay: applied {second.applied}, snapshot unchanged: {same is updated}")
