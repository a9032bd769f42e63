"""
Building a knowledge graph from failure reports
===============================================

Walks the full ingestion pipeline on the bundled sample corpus: parse
the reports and the project tree, validate them, mine the text, build
the graph, and persist a snapshot next to this script.
"""

from collections import Counter
from pathlib import Path

from llgraph import (
    BuildConfig,
    Resources,
    analyze_corpus,
    build_graph,
    load_abbreviations,
    load_gazetteer,
    parse_documents,
    parse_project_tree,
    save_snapshot,
    validate_corpus,
)

DATA = Path(__file__).parent / "data"
OUT = Path(__file__).parent / "out"

# 1. Parse the line-delimited failure reports and the project forest.
#    Both parsers collect problems into a report instead of raising, so
#    a single bad record never blocks the rest of the corpus.
docs, doc_report = parse_documents(DATA / "docs.jsonl")
forest, tree_report = parse_project_tree(DATA / "project_tree.json")
report = doc_report.merge(tree_report).merge(validate_corpus(docs, forest))

print(f"parsed {len(docs)} reports, {len(forest)} project elements")
for locator, message in report.errors:
    print(f"  error   {locator}: {message}")
for locator, message in report.warnings:
    print(f"  warning {locator}: {message}")

# 2. Load the domain resources: the expert gazetteer plus a small
#    abbreviation map. Stopwords come from the built-in defaults.
gazetteer = load_gazetteer(DATA / "gazetteer.json")
resources = Resources.default()
resources.abbreviations.update(load_abbreviations(DATA / "abbreviations.json"))
print(f"gazetteer: {len(gazetteer)} entities, e.g. {gazetteer[0].canonical!r}")

# 3. Mine the text: tokenize, weight terms, classify the technical
#    ones, and mark gazetteer mentions.
analysis = analyze_corpus(docs, gazetteer=gazetteer, resources=resources)
print(f"vocabulary: {len(analysis.stats)} terms and phrases")
print(f"technical terms: {len(analysis.technical_terms)}")
print("  sample:", ", ".join(sorted(analysis.technical_terms)[:8]))

# 4. Build the graph. Documents, project elements, shared vocabulary
#    and entities all become nodes; relations get a level:
#    1 = document-document similarity, 2 = document-linking/structure.
#    Ten short reports share little vocabulary mass, so the similarity
#    threshold sits below the default, which is tuned for larger corpora.
config = BuildConfig(tau_sim=0.04)
snapshot = build_graph(docs, forest, analysis, config)

node_kinds = Counter(n.kind for n in snapshot.nodes.values())
edge_levels = Counter(e.level for e in snapshot.edges.values())
print(f"graph version {snapshot.version}: {len(snapshot.nodes)} nodes, {len(snapshot.edges)} edges")
print("  nodes by kind: ", dict(sorted(node_kinds.items())))
print("  edges by level:", dict(sorted(edge_levels.items())))

# The strongest document-document relation, with the terms that carry it.
level1 = [e for e in snapshot.edges.values() if e.level == 1]
if level1:
    top = max(level1, key=lambda e: e.weight)
    print(f"closest reports: {top.src} -- {top.dst} (cosine {top.weight:.3f})")
    print("  shared terms:", ", ".join(top.provenance))

# 5. Persist. The snapshot is a single checksummed JSON file; loading
#    verifies the checksum and the builder configuration hash.
OUT.mkdir(exist_ok=True)
path = OUT / "snapshot.json"
save_snapshot(snapshot, path)
print(f"saved {path} ({path.stat().st_size // 1024} KiB)")
