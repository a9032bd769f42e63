"""Explainable graph-based search over lessons-learned failure reports.

The package builds a weighted knowledge graph from a document corpus
(reports, project structure, domain entities), answers queries with
direct vector matches plus transitive hits found over bounded cheapest
paths, explains every result, and folds user feedback back into the
edge weights.
"""

from .assist import Dictionary, TermCheck, build_dictionary, check_term, damerau_levenshtein, suggest
from .evalkit import (
    KpiReport,
    KpiRow,
    SynthParams,
    SyntheticCorpus,
    build_synthetic_snapshot,
    compare_kpi,
    fixture_params,
    generate_synthetic_corpus,
    keyword_search,
)
from .feedback import (
    ApplyReport,
    FeedbackError,
    FeedbackLog,
    FeedbackRecord,
    apply_feedback,
    record_feedback,
    rebuild_with_feedback,
)
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
    GraphEdge,
    GraphIntegrityError,
    GraphNode,
    GraphSnapshot,
    SnapshotLoadError,
    add_document,
    build_graph,
    doc_similarity,
    load_snapshot,
    save_snapshot,
)
from .search import (
    EmptyQueryError,
    Explanation,
    Query,
    SearchOutcome,
    SearchParams,
    SearchResult,
    Subgraph,
    direct_hits,
    expand_transitive,
    explain,
    extract_subgraph,
    parse_query,
    run_search,
)
from .textmine import (
    ClassifierParams,
    CorpusAnalysis,
    DocAnalysis,
    GazetteerEntry,
    GazetteerScanner,
    Resources,
    TermStats,
    TfidfVector,
    TokenStream,
    analyze_corpus,
    analyze_document,
    classify_technical_terms,
    compute_tfidf,
    extract_ngrams,
    load_abbreviations,
    load_gazetteer,
    load_stopwords,
    normalize,
    recognize_entities,
)

__version__ = "0.1.0"
