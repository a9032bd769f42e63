import pytest

from llgraph.feedback import (
    FeedbackError,
    FeedbackLog,
    FeedbackRecord,
    apply_feedback,
    feedback_multiplier,
    rebuild_with_feedback,
    record_feedback,
)
from llgraph.search import SearchParams, run_search


def _first_transitive(snapshot, query="clock skew"):
    outcome = run_search(snapshot, query, SearchParams(limit=50))
    result = next(r for r in outcome.results if r.kind == "transitive")
    return outcome, result


def _record_kwargs(result, relevant, value_added=3):
    return dict(
        query_raw="clock skew",
        doc_id=result.doc_id,
        relevant=relevant,
        value_added=value_added,
        result_kind="transitive",
        path_edges=tuple(e.key for e in result.path_edges),
    )


# --- validation and log ------------------------------------------------------


def test_record_validation(snapshot):
    log = FeedbackLog()
    base = dict(query_raw="q", doc_id="d-clk1", relevant=True, result_kind="direct")
    assert record_feedback(log, snapshot, **base) == 1

    with pytest.raises(FeedbackError):
        record_feedback(log, snapshot, **dict(base, value_added=0))
    with pytest.raises(FeedbackError):
        record_feedback(log, snapshot, **dict(base, value_added=6))
    with pytest.raises(FeedbackError):
        record_feedback(log, snapshot, **dict(base, value_added=True))
    with pytest.raises(FeedbackError):
        record_feedback(log, snapshot, **dict(base, result_kind="weird"))
    with pytest.raises(FeedbackError):
        record_feedback(log, snapshot, **dict(base, doc_id="ghost"))
    with pytest.raises(FeedbackError):
        record_feedback(log, snapshot, **dict(base, path_edges=(("a", "b"),)))
    with pytest.raises(FeedbackError):
        record_feedback(log, snapshot, **dict(base, result_kind="transitive"))


def test_log_is_durable_and_sequential(tmp_path, snapshot):
    path = tmp_path / "feedback.jsonl"
    log = FeedbackLog(path)
    first = record_feedback(log, snapshot, query_raw="q", doc_id="d-clk1",
                            relevant=True, result_kind="direct")
    second = record_feedback(log, snapshot, query_raw="q2", doc_id="d-clk2",
                             relevant=False, result_kind="direct")
    assert (first, second) == (1, 2)

    reloaded = FeedbackLog(path)
    assert [r.id for r in reloaded.records] == [1, 2]
    assert reloaded.records[0].query_raw == "q"
    assert reloaded.next_id() == 3


def test_log_rejects_non_increasing_ids():
    log = FeedbackLog()
    log.append(FeedbackRecord(id=5, query_raw="q", doc_id="d", relevant=True,
                              value_added=3, result_kind="direct"))
    with pytest.raises(FeedbackError):
        log.append(FeedbackRecord(id=5, query_raw="q", doc_id="d", relevant=True,
                                  value_added=3, result_kind="direct"))


def test_multiplier_values():
    assert feedback_multiplier(False, 3, 0.1) == 0.9
    assert feedback_multiplier(True, 3, 0.1) == 1.0
    assert feedback_multiplier(True, 5, 0.1) == pytest.approx(1.1)
    assert feedback_multiplier(True, 1, 0.1) == pytest.approx(0.9)


# --- apply ---------------------------------------------------------------------


def test_apply_not_relevant_scales_each_path_edge_exactly(snapshot):
    _, result = _first_transitive(snapshot)
    log = FeedbackLog()
    record_feedback(log, snapshot, **_record_kwargs(result, relevant=False))
    updated, report = apply_feedback(snapshot, log)
    assert report.applied == 1 and not report.skipped
    assert updated.version == snapshot.version + 1
    assert updated.feedback_watermark == 1
    for edge in result.path_edges:
        assert updated.edges[edge.key].weight == edge.weight * 0.9
    untouched = set(snapshot.edges) - {e.key for e in result.path_edges}
    for key in untouched:
        assert updated.edges[key].weight == snapshot.edges[key].weight


def test_apply_positive_feedback_raises_weights(snapshot):
    _, result = _first_transitive(snapshot)
    log = FeedbackLog()
    record_feedback(log, snapshot, **_record_kwargs(result, relevant=True, value_added=5))
    updated, _ = apply_feedback(snapshot, log)
    for edge in result.path_edges:
        assert updated.edges[edge.key].weight == min(0.99, edge.weight * 1.1)


def test_apply_clamps_weights(snapshot):
    _, result = _first_transitive(snapshot)
    log = FeedbackLog()
    for _ in range(60):
        record_feedback(log, snapshot, **_record_kwargs(result, relevant=False))
    updated, _ = apply_feedback(snapshot, log)
    for edge in result.path_edges:
        assert updated.edges[edge.key].weight == 0.01

    log2 = FeedbackLog()
    for _ in range(60):
        record_feedback(log2, snapshot, **_record_kwargs(result, relevant=True, value_added=5))
    raised, _ = apply_feedback(snapshot, log2)
    for edge in result.path_edges:
        assert raised.edges[edge.key].weight == 0.99


def test_apply_nothing_pending_returns_same_object(snapshot):
    log = FeedbackLog()
    same, report = apply_feedback(snapshot, log)
    assert same is snapshot
    assert report.applied == 0


def test_apply_is_idempotent_via_watermark(snapshot):
    _, result = _first_transitive(snapshot)
    log = FeedbackLog()
    record_feedback(log, snapshot, **_record_kwargs(result, relevant=False))
    once, _ = apply_feedback(snapshot, log)
    twice, report = apply_feedback(once, log)
    assert twice is once
    assert report.applied == 0


def test_apply_skips_records_with_missing_edges_entirely(snapshot):
    _, result = _first_transitive(snapshot)
    log = FeedbackLog()
    good_edges = tuple(e.key for e in result.path_edges)
    record_feedback(log, snapshot, query_raw="q", doc_id=result.doc_id, relevant=False,
                    result_kind="transitive", path_edges=good_edges + (("doc:a", "doc:zz"),))
    record_feedback(log, snapshot, **_record_kwargs(result, relevant=False))
    updated, report = apply_feedback(snapshot, log)
    assert report.applied == 1
    assert [rid for rid, _ in report.skipped] == [1]
    # The partially-bad record must not have touched anything.
    for edge in result.path_edges:
        assert updated.edges[edge.key].weight == edge.weight * 0.9
    assert updated.feedback_watermark == 2


def test_apply_rejects_bad_eta(snapshot):
    with pytest.raises(FeedbackError):
        apply_feedback(snapshot, FeedbackLog(), eta=0.0)
    with pytest.raises(FeedbackError):
        apply_feedback(snapshot, FeedbackLog(), eta=1.0)


def test_downvoted_result_does_not_gain_score(snapshot):
    outcome, result = _first_transitive(snapshot)
    old_score = result.score
    log = FeedbackLog()
    record_feedback(log, snapshot, **_record_kwargs(result, relevant=False))
    updated, _ = apply_feedback(snapshot, log)
    after = run_search(updated, "clock skew", SearchParams(limit=50))
    new = [r for r in after.results if r.doc_id == result.doc_id]
    if new:
        assert new[0].score <= old_score


# --- rebuild -----------------------------------------------------------------------


def test_rebuild_replays_whole_log(snapshot):
    _, result = _first_transitive(snapshot)
    log = FeedbackLog()
    record_feedback(log, snapshot, **_record_kwargs(result, relevant=False))
    applied, _ = apply_feedback(snapshot, log)

    rebuilt, seconds, report = rebuild_with_feedback(applied, log)
    assert seconds >= 0
    assert report.applied == 1
    assert rebuilt.version == applied.version + 1
    assert rebuilt.feedback_watermark == 1
    # Deterministic rebuild plus full replay lands on the same weights.
    assert set(rebuilt.edges) == set(applied.edges)
    for key, edge in rebuilt.edges.items():
        assert edge.weight == applied.edges[key].weight
        assert edge.level == applied.edges[key].level


def test_rebuild_with_empty_log_reproduces_graph(snapshot):
    rebuilt, _, report = rebuild_with_feedback(snapshot, FeedbackLog())
    assert report.applied == 0
    assert set(rebuilt.edges) == set(snapshot.edges)
    for key, edge in rebuilt.edges.items():
        assert edge.weight == snapshot.edges[key].weight
    assert set(rebuilt.nodes) == set(snapshot.nodes)
