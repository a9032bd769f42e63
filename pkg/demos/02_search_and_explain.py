"""
Searching the graph and reading the explanations
================================================

Every result carries a human-readable reason: direct hits name the
matched vocabulary, transitive hits name the path that reached them.
The same response also ships a small subgraph for visualization.
"""

from pathlib import Path

from llgraph import (
    BuildConfig,
    EmptyQueryError,
    Resources,
    SearchParams,
    analyze_corpus,
    build_graph,
    load_abbreviations,
    load_gazetteer,
    parse_documents,
    parse_project_tree,
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


def show(raw):
    print(f"\nquery: {raw!r}")
    outcome = run_search(snapshot, raw, params)
    if outcome.query.unknown_terms:
        print("  unknown terms:", ", ".join(outcome.query.unknown_terms))
    for result in outcome.results:
        print(f"  [{result.kind:10s}] {result.score:.3f}  {result.doc_id}  {titles[result.doc_id]}")
        print(f"      {result.explanation.text}")
        if result.path_nodes:
            print("      path:", " -> ".join(result.path_nodes))


# A vocabulary query. Direct hits are the reports whose text matches;
# transitive hits are reached over the graph and explain their route.
show("clock skew")

# An entity query. The gazetteer maps the short form to the canonical
# entity, so reports using either wording respond.
show("bandgap reference")

# A symptom query. The brownout reports respond directly; related
# supply problems ride in over shared vocabulary.
show("brownout reset")

# A query with a typo still works when at least one word is known;
# the unknown word is reported alongside the results.
show("brownout resett")

# A fully unknown query raises instead of returning nothing silently.
try:
    run_search(snapshot, "xylophone zephyr", params)
except EmptyQueryError as exc:
    print(f"\nquery: 'xylophone zephyr' -> {exc}")

# The subgraph payload for the last successful search: the query node,
# every returned doc, and the relations that justify them. It is the
# exact structure a UI renders, nothing needs to be inferred client-side.
outcome = run_search(snapshot, "clock skew", params)
graph = outcome.subgraph.to_payload()
print(f"\nsubgraph for 'clock skew': {len(graph['nodes'])} nodes, {len(graph['edges'])} edges")
for node in graph["nodes"][:6]:
    print(f"  node {node['id']:22s} kind={node['kind']:15s} tag={node['tag']}")
