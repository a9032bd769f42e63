"""
Assisted query writing
======================

The dictionary holds exactly the vocabulary a query can retrieve with,
so validation and spelling suggestions never point at a dead end: every
suggested word is guaranteed to hit at least one report.
"""

from pathlib import Path

from llgraph import (
    BuildConfig,
    Resources,
    SearchParams,
    analyze_corpus,
    build_dictionary,
    build_graph,
    check_term,
    damerau_levenshtein,
    load_abbreviations,
    load_gazetteer,
    parse_documents,
    parse_project_tree,
    run_search,
    suggest,
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

dictionary = build_dictionary(snapshot)
print(f"dictionary: {len(dictionary.entries)} retrievable words, "
      f"{len(dictionary.surface_index)} linking surfaces")

# Word-by-word validation, the backbone of a live input field.
for word in ("clock", "watchdog", "ldo", "flibber"):
    result = check_term(word, dictionary)
    state = f"known, appears in {result.df} report(s)" if result.known else "unknown"
    print(f"  {word!r}: {state}")

# The edit distance behind the suggestions counts insertions, deletions,
# substitutions and adjacent transpositions, each as one operation.
print("\ndistance('clokc', 'clock') =", damerau_levenshtein("clokc", "clock"))

# Misspellings and their repairs.
for typo in ("clokc", "bandgp", "watchdgo", "brownuot"):
    print(f"  {typo!r} -> {suggest(typo, dictionary, k=3)}")

# The guarantee in action: take the top suggestion and search with it.
repaired = suggest("clokc", dictionary, k=1)[0]
outcome = run_search(snapshot, repaired, SearchParams())
direct = [r.doc_id for r in outcome.results if r.kind == "direct"]
print(f"\nsearching with the repair {repaired!r} -> direct hits: {', '.join(direct)}")
