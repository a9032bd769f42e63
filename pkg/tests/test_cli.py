import json

import pytest

from llgraph.cli import main
from llgraph.feedback import FeedbackLog, record_feedback
from llgraph.kgraph import load_snapshot


@pytest.fixture
def workspace(tmp_path, corpus_docs, corpus_forest, corpus_gazetteer):
    docs_path = tmp_path / "docs.jsonl"
    docs_path.write_text(
        "".join(json.dumps(d.to_dict()) + "\n" for d in corpus_docs), encoding="utf-8"
    )
    project_path = tmp_path / "project.json"
    project_path.write_text(
        json.dumps([e.to_dict() for e in corpus_forest.values()]), encoding="utf-8"
    )
    gazetteer_path = tmp_path / "gazetteer.json"
    gazetteer_path.write_text(
        json.dumps(
            [
                {
                    "category": g.category,
                    "canonical": g.canonical,
                    "surface_forms": list(g.surface_forms),
                    "weight": g.weight,
                }
                for g in corpus_gazetteer
            ]
        ),
        encoding="utf-8",
    )
    return tmp_path, docs_path, project_path, gazetteer_path


def test_full_pipeline(workspace, capsys):
    tmp_path, docs_path, project_path, gazetteer_path = workspace
    corpus_path = tmp_path / "corpus.json"
    snap_path = tmp_path / "snap.json"

    assert main(["ingest", "--docs", str(docs_path), "--project", str(project_path),
                 "--gazetteer", str(gazetteer_path), "--out", str(corpus_path)]) == 0
    bundle = json.loads(corpus_path.read_text(encoding="utf-8"))
    assert len(bundle["docs"]) == 6 and bundle["report"]["errors"] == []

    assert main(["build", "--corpus", str(corpus_path), "--out", str(snap_path)]) == 0
    snapshot = load_snapshot(snap_path)
    assert snapshot.version == 1

    graph_path = tmp_path / "subgraph.json"
    assert main(["search", "--snap", str(snap_path), "clock skew",
                 "--emit-graph", str(graph_path)]) == 0
    out = capsys.readouterr().out
    assert "[direct] d-clk" in out
    payload = json.loads(graph_path.read_text(encoding="utf-8"))
    assert any(n["id"] == "query" for n in payload["nodes"])

    doc_path = tmp_path / "new.json"
    doc_path.write_text(json.dumps({
        "id": "d-new1",
        "title": "Clock jitter",
        "failure_description": "Sporadic clock jitter from supply noise.",
        "project_path": ["P1", "M1"],
    }), encoding="utf-8")
    assert main(["add", "--snap", str(snap_path), "--doc", str(doc_path)]) == 0
    updated = load_snapshot(snap_path)
    assert updated.version == 2 and "d-new1" in updated.docs

    # Adding the same doc again fails and leaves the snapshot alone.
    assert main(["add", "--snap", str(snap_path), "--doc", str(doc_path)]) == 1
    assert load_snapshot(snap_path).version == 2

    # A malformed doc is rejected with the field-level message, not a
    # downstream integrity error from a half-coerced record.
    bad_path = tmp_path / "bad_doc.json"
    bad_path.write_text(json.dumps({
        "id": "d-new2",
        "failure_description": "Supply droop on load step.",
        "project_path": "P1",
    }), encoding="utf-8")
    assert main(["add", "--snap", str(snap_path), "--doc", str(bad_path)]) == 2
    err = capsys.readouterr().err
    assert "'project_path' must be a list of element ids" in err
    assert load_snapshot(snap_path).version == 2


def test_ingest_reports_errors_with_nonzero_exit(workspace, capsys):
    tmp_path, docs_path, project_path, _ = workspace
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "x"}\n', encoding="utf-8")  # no failure_description
    out_path = tmp_path / "corpus.json"
    assert main(["ingest", "--docs", str(bad), "--project", str(project_path),
                 "--out", str(out_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_rebuild_replays_feedback(workspace):
    tmp_path, docs_path, project_path, gazetteer_path = workspace
    corpus_path = tmp_path / "corpus.json"
    snap_path = tmp_path / "snap.json"
    main(["ingest", "--docs", str(docs_path), "--project", str(project_path),
          "--gazetteer", str(gazetteer_path), "--out", str(corpus_path)])
    main(["build", "--corpus", str(corpus_path), "--out", str(snap_path)])

    snapshot = load_snapshot(snap_path)
    from llgraph.search import SearchParams, run_search

    outcome = run_search(snapshot, "clock skew", SearchParams(limit=50))
    transitive = next(r for r in outcome.results if r.kind == "transitive")
    log_path = tmp_path / "fb.jsonl"
    log = FeedbackLog(log_path)
    record_feedback(log, snapshot, query_raw="clock skew", doc_id=transitive.doc_id,
                    relevant=False, result_kind="transitive",
                    path_edges=tuple(e.key for e in transitive.path_edges))

    assert main(["rebuild", "--snap", str(snap_path), "--feedback", str(log_path)]) == 0
    rebuilt = load_snapshot(snap_path)
    assert rebuilt.version == snapshot.version + 1
    assert rebuilt.feedback_watermark == 1
    for edge in transitive.path_edges:
        assert rebuilt.edges[edge.key].weight == edge.weight * 0.9


def test_eval_synthetic_writes_reports(tmp_path, capsys):
    csv_path = tmp_path / "kpi.csv"
    json_path = tmp_path / "kpi.json"
    assert main(["eval", "--synthetic", "seed=11,doc_count=40",
                 "--csv", str(csv_path), "--json", str(json_path)]) == 0
    out = capsys.readouterr().out
    assert "average uplift" in out
    assert csv_path.exists() and json_path.exists()
    data = json.loads(json_path.read_text(encoding="utf-8"))
    assert len(data["rows"]) == 8  # 40 // 5 queries


def test_eval_on_snapshot_with_query_file(workspace, capsys):
    tmp_path, docs_path, project_path, gazetteer_path = workspace
    corpus_path = tmp_path / "corpus.json"
    snap_path = tmp_path / "snap.json"
    main(["ingest", "--docs", str(docs_path), "--project", str(project_path),
          "--gazetteer", str(gazetteer_path), "--out", str(corpus_path)])
    main(["build", "--corpus", str(corpus_path), "--out", str(snap_path)])
    queries = tmp_path / "queries.txt"
    queries.write_text("clock skew\nregulator\n", encoding="utf-8")
    assert main(["eval", "--snap", str(snap_path), "--queries", str(queries)]) == 0
    assert "clock skew" in capsys.readouterr().out


def test_eval_requires_inputs(capsys):
    assert main(["eval"]) == 2
    assert main(["eval", "--synthetic", "doc_count=40"]) == 2


def test_search_unknown_query_exits_nonzero(workspace, capsys):
    tmp_path, docs_path, project_path, gazetteer_path = workspace
    corpus_path = tmp_path / "corpus.json"
    snap_path = tmp_path / "snap.json"
    main(["ingest", "--docs", str(docs_path), "--project", str(project_path),
          "--out", str(corpus_path)])
    main(["build", "--corpus", str(corpus_path), "--out", str(snap_path)])
    assert main(["search", "--snap", str(snap_path), "qwxyzzle"]) == 1


def test_missing_snapshot_is_reported(tmp_path, capsys):
    assert main(["search", "--snap", str(tmp_path / "nope.json"), "clock"]) == 1
    assert "error" in capsys.readouterr().err


def test_ingest_custom_stopwords_and_abbreviations(workspace):
    tmp_path, docs_path, project_path, _ = workspace
    stop = tmp_path / "stop_de.txt"
    stop.write_text("und\noder\n", encoding="utf-8")
    abbrev = tmp_path / "abbrev.json"
    abbrev.write_text('{"pll": "phase locked loop"}', encoding="utf-8")
    corpus_path = tmp_path / "corpus.json"
    assert main(["ingest", "--docs", str(docs_path), "--project", str(project_path),
                 "--stopwords", f"de={stop}", "--abbrev", str(abbrev),
                 "--out", str(corpus_path)]) == 0
    bundle = json.loads(corpus_path.read_text(encoding="utf-8"))
    assert bundle["resources"]["stopwords"]["de"] == ["oder", "und"]
    assert bundle["resources"]["abbreviations"] == {"pll": "phase locked loop"}
