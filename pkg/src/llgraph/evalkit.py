"""Evaluation harness: a keyword baseline, the KPI comparison between
baseline and graph search, and a deterministic synthetic corpus whose
ground truth is known by construction.

The headline KPI is uplift: how many results the graph adds on top of a
plain keyword search, as a percentage of the keyword count. Queries the
keyword baseline cannot answer at all (zero hits) are flagged and left
out of the average instead of dividing by zero.
"""

from __future__ import annotations

import csv
import json
import random
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .ingest import DesignCaseDoc, ProjectElement
from .kgraph import BuildConfig, GraphSnapshot, build_graph
from .search import EmptyQueryError, SearchParams, run_search
from .textmine import WORD_RE, ClassifierParams, GazetteerEntry, analyze_corpus


def keyword_search(query_raw: str, docs: Sequence[DesignCaseDoc]) -> list[str]:
    """Plain conjunctive keyword baseline.

    A document matches when every query word occurs, case-insensitively
    and on word boundaries, anywhere in its title, failure description,
    cause or solution. Results keep corpus order.
    """
    words = [w.lower() for w in WORD_RE.findall(query_raw)]
    if not words:
        return []
    patterns = [re.compile(r"\b" + re.escape(w) + r"\b") for w in dict.fromkeys(words)]
    hits = []
    for doc in docs:
        text = "\n".join(doc.text_sections()).lower()
        if all(p.search(text) for p in patterns):
            hits.append(doc.id)
    return hits


@dataclass
class KpiRow:
    """Baseline vs graph counts for one query. uplift_pct is None when
    the keyword baseline found nothing (flagged row)."""

    query: str
    keyword_count: int
    direct: int
    transitive: int
    uplift_pct: float | None

    @property
    def flagged(self) -> bool:
        return self.uplift_pct is None


@dataclass
class KpiReport:
    """All rows plus the average uplift over unflagged rows and the wall
    time of one full graph rebuild of the same corpus."""

    rows: list[KpiRow]
    average_uplift_pct: float
    rebuild_seconds: float

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "query": r.query,
                    "keyword_count": r.keyword_count,
                    "direct": r.direct,
                    "transitive": r.transitive,
                    "uplift_pct": r.uplift_pct,
                    "flagged": r.flagged,
                }
                for r in self.rows
            ],
            "average_uplift_pct": self.average_uplift_pct,
            "rebuild_seconds": self.rebuild_seconds,
        }

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["query", "keyword_count", "direct", "transitive", "uplift_pct"])
            for r in self.rows:
                uplift = "" if r.uplift_pct is None else f"{r.uplift_pct:.2f}"
                writer.writerow([r.query, r.keyword_count, r.direct, r.transitive, uplift])

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def compare_kpi(
    queries: Sequence[str],
    docs: Sequence[DesignCaseDoc],
    snapshot: GraphSnapshot,
    params: SearchParams | None = None,
) -> KpiReport:
    """Run every query through both engines and tabulate the uplift.

    With no explicit params the result cap is lifted to the corpus size
    so counting is not truncated. A query the graph cannot parse (no
    known terms) scores zero on the graph side.
    """
    if params is None:
        params = SearchParams(limit=max(20, len(docs)))

    rows = []
    for query in queries:
        kw = len(keyword_search(query, docs))
        try:
            outcome = run_search(snapshot, query, params)
            direct = sum(1 for r in outcome.results if r.kind == "direct")
            transitive = sum(1 for r in outcome.results if r.kind == "transitive")
        except EmptyQueryError:
            direct = transitive = 0
        uplift = 100.0 * (direct + transitive - kw) / kw if kw > 0 else None
        rows.append(
            KpiRow(query=query, keyword_count=kw, direct=direct, transitive=transitive, uplift_pct=uplift)
        )

    unflagged = [r.uplift_pct for r in rows if r.uplift_pct is not None]
    average = sum(unflagged) / len(unflagged) if unflagged else 0.0

    started = time.perf_counter()
    analysis = analyze_corpus(
        docs,
        gazetteer=snapshot.gazetteer,
        resources=snapshot.resources,
        n_max=snapshot.config.n_max,
        classifier=ClassifierParams(
            specificity_frac=snapshot.config.specificity_frac,
            min_count=snapshot.config.min_count,
        ),
    )
    build_graph(docs, snapshot.elements, analysis, snapshot.config)
    rebuild_seconds = time.perf_counter() - started

    return KpiReport(rows=rows, average_uplift_pct=average, rebuild_seconds=rebuild_seconds)


# --- synthetic corpus ----------------------------------------------------

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
_SYLLABLES = [c + v for c in _CONSONANTS for v in _VOWELS]


@dataclass(frozen=True)
class SynthParams:
    """Shape of a generated corpus. Same params, same corpus: the
    generator is fully driven by the seed."""

    seed: int
    doc_count: int = 110
    vocab_size: int = 400
    entity_count: int = 12
    chain_fraction: float = 0.45
    query_count: int | None = None

    def __post_init__(self) -> None:
        if self.doc_count < 5:
            raise ValueError(f"doc_count must be >= 5, got {self.doc_count}")
        if self.vocab_size < 50:
            raise ValueError(f"vocab_size must be >= 50, got {self.vocab_size}")
        if self.entity_count < 0:
            raise ValueError(f"entity_count must be >= 0, got {self.entity_count}")
        if not (0.0 <= self.chain_fraction < 1.0):
            raise ValueError(f"chain_fraction must lie in [0, 1), got {self.chain_fraction}")

    @property
    def effective_query_count(self) -> int:
        return self.query_count if self.query_count is not None else self.doc_count // 5


@dataclass(frozen=True)
class SynthQuery:
    """One evaluation query with its ground truth: the documents that
    share no query word but hang off the same connector."""

    text: str
    chained_doc_ids: tuple[str, ...]


@dataclass
class SyntheticCorpus:
    docs: list[DesignCaseDoc]
    forest: dict[str, ProjectElement]
    gazetteer: list[GazetteerEntry]
    queries: list[SynthQuery]


def _unique_words(rng: random.Random, count: int, taken: set[str]) -> list[str]:
    words = []
    while len(words) < count:
        word = "".join(rng.choice(_SYLLABLES) for _ in range(3))
        if word not in taken:
            taken.add(word)
            words.append(word)
    return words


def generate_synthetic_corpus(params: SynthParams) -> SyntheticCorpus:
    """Build a corpus where uplift has a known floor.

    Per query: one seed document and one visible document carry the two
    query words (keyword-findable); a few chained documents carry none
    of them but mention the same connector, a gazetteer entity for the
    first entity_count queries and a part-number style term afterwards.
    The remaining budget is filler. Filler vocabulary, query words,
    entity names and connectors are mutually disjoint, so the chained
    documents are invisible to the keyword baseline by construction.
    """
    n_queries = params.effective_query_count
    if n_queries < 1:
        raise ValueError("query_count must be >= 1 (doc_count too small)")
    chained_total = round(params.chain_fraction * params.doc_count)
    budget = 2 * n_queries + chained_total
    if budget > params.doc_count:
        raise ValueError(
            f"doc_count {params.doc_count} cannot hold {n_queries} queries "
            f"and {chained_total} chained docs (needs {budget})"
        )

    rng = random.Random(params.seed)
    taken: set[str] = set()
    vocab = _unique_words(rng, params.vocab_size, taken)
    query_words = _unique_words(rng, 2 * n_queries, taken)

    entity_queries = min(params.entity_count, n_queries)
    entity_names = _unique_words(rng, 2 * entity_queries, taken)
    connectors: list[str] = []
    gazetteer: list[GazetteerEntry] = []
    for i in range(n_queries):
        if i < entity_queries:
            canonical = f"{entity_names[2 * i]} {entity_names[2 * i + 1]}"
            gazetteer.append(GazetteerEntry(category="component", canonical=canonical))
            connectors.append(canonical)
        else:
            stem = _unique_words(rng, 1, taken)[0]
            connectors.append(f"{stem[:4]}{rng.randint(10, 99)}")

    forest: dict[str, ProjectElement] = {}
    n_projects = min(4, n_queries)
    for p in range(n_projects):
        pid = f"proj{p + 1}"
        forest[pid] = ProjectElement(id=pid, name=f"Project {p + 1}", kind="project")
        for m in range(3):
            mid = f"{pid}-mod{m + 1}"
            forest[mid] = ProjectElement(id=mid, name=f"Module {p + 1}.{m + 1}", kind="module", parent_id=pid)

    def path_for(i: int) -> list[str]:
        pid = f"proj{(i % n_projects) + 1}"
        return [pid, f"{pid}-mod{(i % 3) + 1}"]

    per_query = [chained_total // n_queries] * n_queries
    for i in range(chained_total % n_queries):
        per_query[i] += 1

    docs: list[DesignCaseDoc] = []
    queries: list[SynthQuery] = []
    width = len(str(params.doc_count))

    def next_id() -> str:
        return f"case-{len(docs) + 1:0{width}d}"

    def pick(n: int) -> list[str]:
        return rng.sample(vocab, n)

    created = "2024-01-01T00:00:00+00:00"
    for i in range(n_queries):
        qa, qb = query_words[2 * i], query_words[2 * i + 1]
        conn = connectors[i]
        f = pick(6)
        seed_id = next_id()
        docs.append(
            DesignCaseDoc(
                id=seed_id,
                title=f"{qa} {qb} fault",
                failure_description=f"Observed {qa} {qb} issue near the {conn}.",
                cause=f"Root cause traced to {f[0]} {f[1]}.",
                solution=f"Replaced {f[2]} and revalidated.",
                project_path=path_for(i),
                created_at=created,
            )
        )
        visible_id = next_id()
        docs.append(
            DesignCaseDoc(
                id=visible_id,
                title=f"{qa} regression",
                failure_description=f"Recurring {qa} and {qb} behaviour around {f[3]}.",
                cause=f"Linked to {f[4]}.",
                solution=f"Adjusted {f[5]} settings.",
                project_path=path_for(i),
                created_at=created,
            )
        )
        chained_ids = []
        for _ in range(per_query[i]):
            g = pick(3)
            cid = next_id()
            chained_ids.append(cid)
            docs.append(
                DesignCaseDoc(
                    id=cid,
                    title=f"{conn} anomaly",
                    failure_description=f"Intermittent drift in the {conn} under {g[0]} load.",
                    cause=f"Suspected {g[1]} wear.",
                    solution=f"Cleaned {g[2]} and monitored.",
                    created_at=created,
                )
            )
        queries.append(SynthQuery(text=f"{qa} {qb}", chained_doc_ids=tuple(chained_ids)))

    filler_index = 0
    while len(docs) < params.doc_count:
        g = pick(5)
        docs.append(
            DesignCaseDoc(
                id=next_id(),
                title=f"{g[0]} review",
                failure_description=f"General note about {g[1]} {g[2]} during testing.",
                cause=f"Ordinary {g[3]} variance.",
                solution=f"Documented {g[4]} procedure.",
                project_path=path_for(filler_index),
                created_at=created,
            )
        )
        filler_index += 1

    return SyntheticCorpus(docs=docs, forest=forest, gazetteer=gazetteer, queries=queries)


def fixture_params() -> SynthParams:
    """The pinned corpus used by the bundled evaluation: 110 documents,
    22 queries, 45% of the corpus keyword-invisible chained documents."""
    return SynthParams(seed=20240101)


def build_synthetic_snapshot(corpus: SyntheticCorpus, config: BuildConfig | None = None) -> GraphSnapshot:
    """Analyze and build a graph over a generated corpus in one step."""
    config = config or BuildConfig()
    analysis = analyze_corpus(
        corpus.docs,
        gazetteer=corpus.gazetteer,
        n_max=config.n_max,
        classifier=ClassifierParams(
            specificity_frac=config.specificity_frac, min_count=config.min_count
        ),
    )
    return build_graph(corpus.docs, corpus.forest, analysis, config)
