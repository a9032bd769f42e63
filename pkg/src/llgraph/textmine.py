"""Text analysis: normalization, n-grams, TFIDF weighting, and the
detectors that decide which strings become linking nodes (technical
terms, domain entities).

The TFIDF variant used throughout is sublinear and smoothed:

    tf(t, d)  = 1 + ln(count)
    idf(t)    = ln((1 + N) / (1 + df)) + 1
    weight    = tf * idf, then L2-normalized per document

so every term that appears anywhere keeps a strictly positive weight
and document vectors are unit length.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

# Word = maximal run of letters/digits; underscores and punctuation split.
WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

DEFAULT_STOPWORDS: dict[str, frozenset[str]] = {
    "en": frozenset(
        """
        a about after again all also an and any are as at be because been
        before being between both but by can could did do does down during
        each few for from further had has have having he her here hers him
        his how i if in into is it its just me more most my no nor not of
        off on once only or other our out over own same she should so some
        such than that the their them then there these they this those
        through to too under until up very was we were what when where
        which while who why will with would you your
        """.split()
    ),
    "de": frozenset(
        """
        aber alle als also am an auch auf aus bei bin bis das dass dem den
        der des die doch durch ein eine einem einen einer eines er es fuer
        hat hatte ich ihr im in ist ja kann mit nach nicht noch nur oder
        sich sie sind so ueber um und unter vom von vor war war wenn wie
        wir wird zu zum zur
        """.split()
    ),
}


@dataclass(frozen=True)
class GazetteerEntry:
    """One domain entity: canonical name plus accepted surface spellings."""

    category: str
    canonical: str
    surface_forms: tuple[str, ...] = ()
    weight: float = 0.9

    def __post_init__(self) -> None:
        if not (0.0 < self.weight <= 1.0):
            raise ValueError(f"entity weight must lie in (0, 1], got {self.weight}")

    def all_forms(self) -> tuple[str, ...]:
        return (self.canonical,) + tuple(self.surface_forms)


@dataclass
class Resources:
    """Language resources shared by normalization: stopword lists per
    language and a lowercase abbreviation -> expansion map."""

    stopwords: dict[str, frozenset[str]] = field(default_factory=dict)
    abbreviations: dict[str, str] = field(default_factory=dict)

    @classmethod
    def default(cls) -> "Resources":
        return cls(stopwords=dict(DEFAULT_STOPWORDS), abbreviations={})

    def stopwords_for(self, language: str) -> frozenset[str]:
        return self.stopwords.get(language, self.stopwords.get("en", frozenset()))

    def to_dict(self) -> dict:
        return {
            "stopwords": {lang: sorted(words) for lang, words in self.stopwords.items()},
            "abbreviations": dict(self.abbreviations),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Resources":
        return cls(
            stopwords={lang: frozenset(words) for lang, words in data.get("stopwords", {}).items()},
            abbreviations={k.lower(): v for k, v in data.get("abbreviations", {}).items()},
        )


def load_stopwords(source: IO | str | Path) -> frozenset[str]:
    """Read a stopword list: one word per line, '#' comments allowed."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    words = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


def load_abbreviations(source: IO | str | Path) -> dict[str, str]:
    """Read an abbreviation map from JSON ({"pll": "phase locked loop", ...})."""
    if isinstance(source, (str, Path)):
        data = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        data = json.load(source)
    if not isinstance(data, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in data.items()
    ):
        raise ValueError("abbreviation map must be a JSON object of string -> string")
    return {k.lower(): v for k, v in data.items()}


def load_gazetteer(source: IO | str | Path | list) -> list[GazetteerEntry]:
    """Read gazetteer entries from a JSON array of objects."""
    if isinstance(source, list):
        data = source
    elif isinstance(source, (str, Path)):
        data = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        data = json.load(source)
    if not isinstance(data, list):
        raise ValueError("gazetteer must be a JSON array")
    entries = []
    for idx, item in enumerate(data):
        if not isinstance(item, dict) or "canonical" not in item or "category" not in item:
            raise ValueError(f"gazetteer entry #{idx} needs 'category' and 'canonical'")
        entries.append(
            GazetteerEntry(
                category=item["category"],
                canonical=item["canonical"],
                surface_forms=tuple(item.get("surface_forms") or ()),
                weight=float(item.get("weight", 0.9)),
            )
        )
    return entries


@dataclass
class TokenStream:
    """Normalized tokens of one document plus casing bookkeeping.

    case_counts maps each lowercased raw word to (times seen fully
    uppercase, times seen at all); the technical-term classifier uses it
    to spot acronym-style tokens.
    """

    doc_id: str
    tokens: list[str]
    unknown_ratio: float = 0.0
    case_counts: dict[str, tuple[int, int]] = field(default_factory=dict)


def normalize(
    text: str,
    language: str = "en",
    resources: Resources | None = None,
    doc_id: str = "",
) -> TokenStream:
    """Lowercase, split into words, expand abbreviations, drop stopwords.

    Abbreviation expansion happens before stopword removal so that an
    expansion like "printed circuit board" still loses its stopwords.
    Expansion is recursive but each token can trigger a given key only
    once, so cyclic maps terminate. Tokens shorter than 2 characters are
    dropped unless they mix letters and digits.
    """
    resources = resources or Resources.default()
    stop = resources.stopwords_for(language)
    abbrev = resources.abbreviations

    case_counts: dict[str, tuple[int, int]] = {}
    raw_words = WORD_RE.findall(text)
    for word in raw_words:
        low = word.lower()
        upper, total = case_counts.get(low, (0, 0))
        case_counts[low] = (upper + (1 if word.isupper() else 0), total + 1)

    def expand(word: str, visited: frozenset[str]) -> list[str]:
        if word in abbrev and word not in visited:
            out: list[str] = []
            for sub in WORD_RE.findall(abbrev[word].lower()):
                out.extend(expand(sub, visited | {word}))
            return out
        return [word]

    tokens: list[str] = []
    for word in raw_words:
        for token in expand(word.lower(), frozenset()):
            if token in stop:
                continue
            if len(token) < 2 and not _mixes_letters_digits(token):
                continue
            tokens.append(token)

    return TokenStream(doc_id=doc_id, tokens=tokens, case_counts=case_counts)


def _mixes_letters_digits(token: str) -> bool:
    return any(c.isalpha() for c in token) and any(c.isdigit() for c in token)


def extract_ngrams(stream: TokenStream | Sequence[str], n_max: int) -> dict[str, int]:
    """Count contiguous n-grams for n = 1..n_max, space-joined."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    tokens = stream.tokens if isinstance(stream, TokenStream) else list(stream)
    counts: Counter[str] = Counter()
    for n in range(1, n_max + 1):
        for i in range(len(tokens) - n + 1):
            counts[" ".join(tokens[i : i + n])] += 1
    return dict(counts)


@dataclass
class TermStats:
    """Corpus-level statistics of one vocabulary entry (unigram or n-gram)."""

    term: str
    df: int
    total_count: int
    idf: float


@dataclass
class TfidfVector:
    """L2-normalized sparse TFIDF vector of one document.

    norm is the pre-normalization Euclidean length; a document whose
    vocabulary is empty gets an empty weight map and norm 0.
    """

    doc_id: str
    weights: dict[str, float]
    norm: float


def compute_tfidf(
    corpus: Sequence[TokenStream | tuple[str, dict[str, int]]],
    n_max: int = 1,
) -> tuple[list[TfidfVector], dict[str, TermStats]]:
    """Compute smoothed sublinear TFIDF vectors over the corpus.

    Accepts TokenStreams (n-grams up to n_max are counted here) or
    pre-counted (doc_id, counts) pairs, which are used as-is.
    """
    if not corpus:
        raise ValueError("cannot compute TFIDF over an empty corpus")

    per_doc: list[tuple[str, dict[str, int]]] = []
    for item in corpus:
        if isinstance(item, TokenStream):
            per_doc.append((item.doc_id, extract_ngrams(item, n_max)))
        else:
            doc_id, counts = item
            per_doc.append((doc_id, dict(counts)))

    n_docs = len(per_doc)
    df: Counter[str] = Counter()
    total: Counter[str] = Counter()
    for _, counts in per_doc:
        for term, count in counts.items():
            df[term] += 1
            total[term] += count

    stats = {
        term: TermStats(
            term=term,
            df=df[term],
            total_count=total[term],
            idf=math.log((1 + n_docs) / (1 + df[term])) + 1.0,
        )
        for term in df
    }

    vectors = []
    for doc_id, counts in per_doc:
        weights = {
            term: (1.0 + math.log(count)) * stats[term].idf
            for term, count in counts.items()
            if count > 0
        }
        norm = math.sqrt(sum(w * w for w in weights.values()))
        if norm > 0:
            weights = {t: w / norm for t, w in weights.items()}
        vectors.append(TfidfVector(doc_id=doc_id, weights=weights, norm=norm))
    return vectors, stats


class CaseRegistry:
    """Merged casing statistics across a corpus, fed by TokenStreams."""

    def __init__(self) -> None:
        self._counts: dict[str, tuple[int, int]] = {}

    def absorb(self, stream: TokenStream) -> None:
        for word, (upper, total) in stream.case_counts.items():
            have_upper, have_total = self._counts.get(word, (0, 0))
            self._counts[word] = (have_upper + upper, have_total + total)

    def always_upper(self, term: str) -> bool:
        """True when every raw occurrence of the word was fully uppercase."""
        upper, total = self._counts.get(term, (0, 0))
        return total > 0 and upper == total


@dataclass(frozen=True)
class ClassifierParams:
    """Knobs of the technical-term detector.

    specificity_frac caps document frequency: a term qualifying by rarity
    may appear in at most ceil(specificity_frac * N) documents, and must
    occur at least min_count times overall.
    """

    specificity_frac: float = 0.2
    min_count: int = 2

    def __post_init__(self) -> None:
        if not (0.0 < self.specificity_frac <= 1.0):
            raise ValueError(f"specificity_frac must lie in (0, 1], got {self.specificity_frac}")
        if self.min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {self.min_count}")


def classify_technical_terms(
    stats: dict[str, TermStats],
    gazetteer: Sequence[GazetteerEntry],
    params: ClassifierParams | None = None,
    *,
    n_docs: int,
    case_registry: CaseRegistry | None = None,
) -> set[str]:
    """Pick the vocabulary entries that behave like technical vocabulary.

    A term qualifies if any rule fires:
      (a) it is a known gazetteer form,
      (b) it mixes letters and digits (part numbers, "v2", "iso9001"),
      (c) it was written fully uppercase at every raw occurrence and is
          2..6 characters long (acronyms),
      (d) it is rare (df <= ceil(specificity_frac * N)) yet recurring
          (total count >= min_count).
    Rules (b) and (c) only apply to single tokens, not n-grams.
    """
    params = params or ClassifierParams()
    gazetteer_forms = {
        form.lower() for entry in gazetteer for form in entry.all_forms()
    }
    df_cap = math.ceil(params.specificity_frac * n_docs)

    technical: set[str] = set()
    for term, st in stats.items():
        if term in gazetteer_forms:
            technical.add(term)
            continue
        single = " " not in term
        if single and _mixes_letters_digits(term):
            technical.add(term)
            continue
        if (
            single
            and case_registry is not None
            and 2 <= len(term) <= 6
            and case_registry.always_upper(term)
        ):
            technical.add(term)
            continue
        if st.df <= df_cap and st.total_count >= params.min_count:
            technical.add(term)
    return technical


@dataclass(frozen=True)
class EntityMention:
    """One gazetteer hit inside a document's raw text."""

    canonical: str
    category: str
    surface: str
    start: int
    end: int


class GazetteerScanner:
    """Longest-match scanner over all gazetteer surface forms.

    Forms are matched case-insensitively on word boundaries, with any
    whitespace run accepted between the words of a multi-word form.
    """

    def __init__(self, gazetteer: Sequence[GazetteerEntry]):
        self._by_form: dict[str, GazetteerEntry] = {}
        forms: list[str] = []
        for entry in gazetteer:
            for form in entry.all_forms():
                key = " ".join(form.lower().split())
                if key and key not in self._by_form:
                    self._by_form[key] = entry
                    forms.append(key)
        # Longest alternative first so "clock tree" beats "clock".
        forms.sort(key=len, reverse=True)
        if forms:
            pattern = r"\b(?:" + "|".join(re.escape(f).replace(r"\ ", r"\s+") for f in forms) + r")\b"
            self._re: re.Pattern | None = re.compile(pattern, re.IGNORECASE)
        else:
            self._re = None

    def scan(self, text: str) -> list[EntityMention]:
        if self._re is None:
            return []
        mentions = []
        for match in self._re.finditer(text):
            surface = match.group(0)
            entry = self._by_form[" ".join(surface.lower().split())]
            mentions.append(
                EntityMention(
                    canonical=entry.canonical,
                    category=entry.category,
                    surface=surface,
                    start=match.start(),
                    end=match.end(),
                )
            )
        return mentions


def recognize_entities(text: str, gazetteer: Sequence[GazetteerEntry]) -> list[EntityMention]:
    """Find gazetteer entities in raw text (builds a scanner per call;
    prefer GazetteerScanner when scanning many documents)."""
    return GazetteerScanner(gazetteer).scan(text)


@dataclass
class DocAnalysis:
    """Everything the graph builder needs to know about one document."""

    doc_id: str
    stream: TokenStream
    term_counts: dict[str, int]
    entities: list[EntityMention]


@dataclass
class CorpusAnalysis:
    """Corpus-wide text analysis: vectors, statistics and detections."""

    streams: dict[str, TokenStream]
    vectors: dict[str, TfidfVector]
    stats: dict[str, TermStats]
    technical_terms: set[str]
    entities: dict[str, list[EntityMention]]
    case_registry: CaseRegistry
    n_max: int
    resources: Resources
    gazetteer: list[GazetteerEntry]


def analyze_document(
    doc,
    resources: Resources,
    n_max: int,
    scanner: GazetteerScanner,
) -> tuple[TokenStream, dict[str, int], list[EntityMention]]:
    text = "\n".join(doc.text_sections())
    stream = normalize(text, language=doc.language, resources=resources, doc_id=doc.id)
    counts = extract_ngrams(stream, n_max)
    return stream, counts, scanner.scan(text)


def analyze_corpus(
    docs: Sequence,
    gazetteer: Sequence[GazetteerEntry] = (),
    resources: Resources | None = None,
    n_max: int = 3,
    classifier: ClassifierParams | None = None,
) -> CorpusAnalysis:
    """Run the full text pipeline over a corpus of documents."""
    resources = resources or Resources.default()
    scanner = GazetteerScanner(gazetteer)

    streams: dict[str, TokenStream] = {}
    counts_by_doc: list[tuple[str, dict[str, int]]] = []
    entities: dict[str, list[EntityMention]] = {}
    registry = CaseRegistry()
    for doc in docs:
        stream, counts, mentions = analyze_document(doc, resources, n_max, scanner)
        streams[doc.id] = stream
        counts_by_doc.append((doc.id, counts))
        entities[doc.id] = mentions
        registry.absorb(stream)

    if counts_by_doc:
        vector_list, stats = compute_tfidf(counts_by_doc)
        vectors = {v.doc_id: v for v in vector_list}
        technical = classify_technical_terms(
            stats,
            gazetteer,
            classifier,
            n_docs=len(counts_by_doc),
            case_registry=registry,
        )
    else:
        vectors, stats, technical = {}, {}, set()

    return CorpusAnalysis(
        streams=streams,
        vectors=vectors,
        stats=stats,
        technical_terms=technical,
        entities=entities,
        case_registry=registry,
        n_max=n_max,
        resources=resources,
        gazetteer=list(gazetteer),
    )
