"""Command line front end.

The pipeline is: `llg ingest` turns raw files into a validated corpus
bundle, `llg build` turns a bundle into a graph snapshot, and the
remaining commands (search, add, rebuild, eval, serve) operate on
snapshots. Every command exits nonzero on validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .evalkit import SynthParams, build_synthetic_snapshot, compare_kpi, generate_synthetic_corpus
from .feedback import FeedbackLog, rebuild_with_feedback
from .ingest import (
    CorpusReport,
    DesignCaseDoc,
    ProjectElement,
    parse_documents,
    parse_project_tree,
    validate_corpus,
)
from .kgraph import (
    BuildConfig,
    GraphIntegrityError,
    SnapshotLoadError,
    add_document,
    build_graph,
    load_snapshot,
    save_snapshot,
)
from .search import EmptyQueryError, SearchParams, run_search
from .textmine import (
    ClassifierParams,
    DocAnalysis,
    GazetteerScanner,
    Resources,
    analyze_corpus,
    analyze_document,
    load_abbreviations,
    load_gazetteer,
    load_stopwords,
)


def _print_report(report: CorpusReport) -> None:
    for locator, message in report.errors:
        print(f"error: {locator}: {message}", file=sys.stderr)
    for locator, message in report.warnings:
        print(f"warning: {locator}: {message}", file=sys.stderr)


def _write_corpus_bundle(path: Path, docs, forest, gazetteer, resources: Resources, report: CorpusReport) -> None:
    bundle = {
        "docs": [d.to_dict() for d in docs],
        "elements": [e.to_dict() for e in forest.values()],
        "gazetteer": [
            {
                "category": g.category,
                "canonical": g.canonical,
                "surface_forms": list(g.surface_forms),
                "weight": g.weight,
            }
            for g in gazetteer
        ],
        "resources": resources.to_dict(),
        "report": report.to_dict(),
    }
    path.write_text(json.dumps(bundle, indent=2) + "\n", encoding="utf-8")


def _read_corpus_bundle(path: Path):
    bundle = json.loads(path.read_text(encoding="utf-8"))
    docs = [DesignCaseDoc.from_dict(d) for d in bundle["docs"]]
    forest = {e["id"]: ProjectElement.from_dict(e) for e in bundle["elements"]}
    gazetteer = load_gazetteer(bundle.get("gazetteer", []))
    resources = Resources.from_dict(bundle.get("resources", {}))
    return docs, forest, gazetteer, resources


def _cmd_ingest(args: argparse.Namespace) -> int:
    docs, doc_report = parse_documents(args.docs)
    forest, tree_report = parse_project_tree(args.project)
    report = validate_corpus(docs, forest)
    report.merge(doc_report).merge(tree_report)

    gazetteer = load_gazetteer(args.gazetteer) if args.gazetteer else []
    resources = Resources.default()
    for spec in args.stopwords or []:
        lang, _, file = spec.partition("=")
        if not file:
            print(f"error: --stopwords expects LANG=FILE, got {spec!r}", file=sys.stderr)
            return 2
        resources.stopwords[lang] = load_stopwords(file)
    if args.abbrev:
        resources.abbreviations = load_abbreviations(args.abbrev)

    _print_report(report)
    _write_corpus_bundle(Path(args.out), docs, forest, gazetteer, resources, report)
    print(f"corpus bundle written to {args.out} ({report.doc_count} docs, {report.element_count} elements)")
    return 0 if report.ok else 1


def _load_config(path: str | None) -> BuildConfig:
    if not path:
        return BuildConfig()
    return BuildConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _cmd_build(args: argparse.Namespace) -> int:
    docs, forest, gazetteer, resources = _read_corpus_bundle(Path(args.corpus))
    config = _load_config(args.config)
    analysis = analyze_corpus(
        docs,
        gazetteer=gazetteer,
        resources=resources,
        n_max=config.n_max,
        classifier=ClassifierParams(specificity_frac=config.specificity_frac, min_count=config.min_count),
    )
    snapshot = build_graph(docs, forest, analysis, config)
    save_snapshot(snapshot, args.out)
    print(
        f"snapshot v{snapshot.version} written to {args.out} "
        f"({len(snapshot.nodes)} nodes, {len(snapshot.edges)} edges)"
    )
    return 0


def _cmd_search(args: argparse.Namespace) -> int:
    snapshot = load_snapshot(args.snap)
    try:
        outcome = run_search(snapshot, args.query, SearchParams(limit=args.limit))
    except EmptyQueryError as exc:
        print(f"no known terms in query ({', '.join(exc.unknown_terms) or 'empty'})", file=sys.stderr)
        return 1
    for result in outcome.results:
        doc = snapshot.docs[result.doc_id]
        line = f"[{result.kind}] {result.doc_id} score={result.score:.4f} {doc.title}"
        print(line)
        if result.explanation:
            print(f"    {result.explanation.text}")
    if args.emit_graph:
        Path(args.emit_graph).write_text(
            json.dumps(outcome.subgraph.to_payload(), indent=2) + "\n", encoding="utf-8"
        )
        print(f"subgraph written to {args.emit_graph}")
    return 0


def _cmd_add(args: argparse.Namespace) -> int:
    snapshot = load_snapshot(args.snap)
    raw = json.loads(Path(args.doc).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        print("error: --doc must contain a single JSON object", file=sys.stderr)
        return 2
    docs, report = parse_documents([json.dumps(raw)])
    if not report.ok or not docs:
        _print_report(report)
        return 2
    doc = docs[0]
    scanner = GazetteerScanner(snapshot.gazetteer)
    stream, counts, mentions = analyze_document(doc, snapshot.resources, snapshot.config.n_max, scanner)
    analysis = DocAnalysis(doc_id=doc.id, stream=stream, term_counts=counts, entities=mentions)
    try:
        updated = add_document(snapshot, doc, analysis)
    except GraphIntegrityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save_snapshot(updated, args.snap)
    print(f"doc {doc.id} added, snapshot now v{updated.version} ({len(updated.edges)} edges)")
    return 0


def _cmd_rebuild(args: argparse.Namespace) -> int:
    snapshot = load_snapshot(args.snap)
    log = FeedbackLog(args.feedback) if args.feedback else FeedbackLog()
    rebuilt, seconds, report = rebuild_with_feedback(snapshot, log)
    save_snapshot(rebuilt, args.snap)
    print(f"rebuilt snapshot v{rebuilt.version} in {seconds:.2f}s, replayed {report.applied} judgments")
    for record_id, reason in report.skipped:
        print(f"warning: feedback #{record_id} skipped: {reason}", file=sys.stderr)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    if args.synthetic:
        overrides = {}
        for part in args.synthetic.split(","):
            key, _, value = part.partition("=")
            if not value:
                print(f"error: --synthetic expects key=value pairs, got {part!r}", file=sys.stderr)
                return 2
            overrides[key.strip()] = value.strip()
        if "seed" not in overrides:
            print("error: --synthetic needs at least seed=N", file=sys.stderr)
            return 2
        kwargs = {
            key: (float(value) if key == "chain_fraction" else int(value))
            for key, value in overrides.items()
        }
        corpus = generate_synthetic_corpus(SynthParams(**kwargs))
        snapshot = build_synthetic_snapshot(corpus)
        docs = corpus.docs
        queries = [q.text for q in corpus.queries]
    else:
        if not args.snap or not args.queries:
            print("error: need --snap and --queries (or --synthetic)", file=sys.stderr)
            return 2
        snapshot = load_snapshot(args.snap)
        docs = list(snapshot.docs.values())
        queries = [
            line.strip()
            for line in Path(args.queries).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    report = compare_kpi(queries, docs, snapshot)
    for row in report.rows:
        uplift = "n/a (keyword found nothing)" if row.uplift_pct is None else f"{row.uplift_pct:+.1f}%"
        print(
            f"{row.query!r}: keyword={row.keyword_count} direct={row.direct} "
            f"transitive={row.transitive} uplift={uplift}"
        )
    print(f"average uplift over {sum(1 for r in report.rows if not r.flagged)} queries: "
          f"{report.average_uplift_pct:+.1f}%")
    print(f"full rebuild took {report.rebuild_seconds:.2f}s")
    if args.csv:
        report.write_csv(args.csv)
        print(f"csv written to {args.csv}")
    if args.json:
        report.write_json(args.json)
        print(f"json written to {args.json}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import SnapshotHolder, create_app

    snapshot = load_snapshot(args.snap)
    holder = SnapshotHolder(snapshot, save_path=args.snap)
    log = FeedbackLog(args.feedback) if args.feedback else None
    app = create_app(holder, feedback_log=log, admin_token=args.admin_token, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="llg", description="graph search over lessons-learned reports")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and validate raw files into a corpus bundle")
    p.add_argument("--docs", required=True, help="line-delimited JSON reports")
    p.add_argument("--project", required=True, help="project tree JSON")
    p.add_argument("--gazetteer", help="entity gazetteer JSON")
    p.add_argument("--stopwords", action="append", metavar="LANG=FILE", help="extra stopword list")
    p.add_argument("--abbrev", help="abbreviation map JSON")
    p.add_argument("--out", required=True, help="corpus bundle output path")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("build", help="build a graph snapshot from a corpus bundle")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config", help="build config JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("search", help="query a snapshot")
    p.add_argument("--snap", required=True)
    p.add_argument("query")
    p.add_argument("--limit", type=int, default=20)
    p.add_argument("--emit-graph", help="write the result subgraph JSON here")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("add", help="add one document to a snapshot in place")
    p.add_argument("--snap", required=True)
    p.add_argument("--doc", required=True, help="single JSON object")
    p.set_defaults(func=_cmd_add)

    p = sub.add_parser("rebuild", help="rebuild the graph and replay feedback")
    p.add_argument("--snap", required=True)
    p.add_argument("--feedback", help="feedback log (JSONL)")
    p.set_defaults(func=_cmd_rebuild)

    p = sub.add_parser("eval", help="compare graph search against the keyword baseline")
    p.add_argument("--snap")
    p.add_argument("--queries", help="text file, one query per line")
    p.add_argument("--synthetic", metavar="seed=N[,key=val...]", help="generate a synthetic corpus instead")
    p.add_argument("--csv", help="write per-query rows as CSV")
    p.add_argument("--json", help="write the full report as JSON")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="serve a snapshot over HTTP")
    p.add_argument("--snap", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--feedback", help="feedback log (JSONL)")
    p.add_argument("--admin-token", help="require this X-Admin-Token for rebuilds")
    p.add_argument("--ui", help="static UI directory to mount at /")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SnapshotLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
