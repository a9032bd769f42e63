"""Query assistance: a dictionary of retrievable vocabulary and
spelling suggestions for unknown terms.

The guarantee behind suggest() is that every candidate it returns will
produce at least one direct hit when searched: dictionary entries are
restricted to single tokens whose strongest per-document weight clears
the query similarity floor, and linking-node surfaces match by rule (b)
regardless of weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kgraph import GraphSnapshot
from .textmine import Resources, normalize


@dataclass
class Dictionary:
    """Searchable vocabulary of one snapshot.

    entries maps retrievable single-token terms to their document
    frequency; surface_index maps normalized linking-node surfaces
    (including multi-word ones) to the node id, with surface_df giving
    the number of documents adjacent to that node.
    """

    entries: dict[str, int] = field(default_factory=dict)
    surface_index: dict[str, str] = field(default_factory=dict)
    surface_df: dict[str, int] = field(default_factory=dict)
    resources: Resources = field(default_factory=Resources.default)
    n_max: int = 3


def build_dictionary(snapshot: GraphSnapshot, *, tau_q: float = 0.1) -> Dictionary:
    """Collect every term a query can actually retrieve with.

    A vocabulary unigram enters when its maximum normalized TFIDF weight
    over all documents is at least tau_q (a one-word query scores
    exactly that weight against the best document). Linking-node
    surfaces enter unconditionally: matching one is a direct hit by
    construction.
    """
    best_weight: dict[str, float] = {}
    df: dict[str, int] = {}
    for vec in snapshot.tfidf_index.values():
        for term, weight in vec.weights.items():
            if " " in term:
                continue
            if weight > best_weight.get(term, 0.0):
                best_weight[term] = weight
            df[term] = df.get(term, 0) + 1

    entries = {term: df[term] for term, weight in best_weight.items() if weight >= tau_q}

    surface_index: dict[str, str] = {}
    surface_df: dict[str, int] = {}
    for node_id in sorted(snapshot.nodes):
        node = snapshot.nodes[node_id]
        if node.kind != "linking":
            continue
        doc_degree = sum(
            1
            for edge in snapshot.neighbors(node_id)
            if snapshot.nodes[edge.other(node_id)].kind == "design_case"
        )
        if doc_degree == 0:
            continue
        for surface in node.surfaces:
            stream = normalize(surface, resources=snapshot.resources)
            key = " ".join(stream.tokens)
            if not key or key in surface_index:
                continue
            surface_index[key] = node_id
            surface_df[key] = doc_degree

    return Dictionary(
        entries=entries,
        surface_index=surface_index,
        surface_df=surface_df,
        resources=snapshot.resources,
        n_max=snapshot.config.n_max,
    )


@dataclass(frozen=True)
class TermCheck:
    known: bool
    df: int = 0


def check_term(term: str, dictionary: Dictionary) -> TermCheck:
    """Is this term (or phrase) retrievable, and how widespread is it?"""
    stream = normalize(term, resources=dictionary.resources)
    key = " ".join(stream.tokens)
    if not key:
        return TermCheck(known=False)
    if key in dictionary.surface_index:
        return TermCheck(known=True, df=dictionary.surface_df[key])
    if " " not in key and key in dictionary.entries:
        return TermCheck(known=True, df=dictionary.entries[key])
    return TermCheck(known=False)


def damerau_levenshtein(a: str, b: str) -> int:
    """Edit distance counting insertions, deletions, substitutions and
    transpositions of adjacent characters (each cost 1)."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                cur[j] = min(cur[j], prev2[j - 2] + 1)
        prev2, prev = prev, cur
    return prev[lb]


def suggest(term: str, dictionary: Dictionary, k: int = 10) -> list[str]:
    """Up to k retrievable replacements for an unknown term.

    Candidates are close in edit distance (<= 2) or share the first
    three characters; ranking is by (distance, document frequency
    descending, alphabetical). A known term needs no suggestion and
    returns [].
    """
    if check_term(term, dictionary).known:
        return []
    stream = normalize(term, resources=dictionary.resources)
    needle = " ".join(stream.tokens) or term.lower().strip()
    if not needle:
        return []

    pool: dict[str, int] = dict(dictionary.surface_df)
    for entry, df in dictionary.entries.items():
        if entry not in pool:
            pool[entry] = df

    scored = []
    for cand, df in pool.items():
        distance = damerau_levenshtein(needle, cand)
        prefix_hit = len(needle) >= 3 and len(cand) >= 3 and needle[:3] == cand[:3]
        if distance <= 2 or prefix_hit:
            scored.append((distance, -df, cand))
    scored.sort()
    return [cand for _, _, cand in scored[:k]]
