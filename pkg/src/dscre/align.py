"""Validate generated relations against a relation set and align near-misses.

The retrieval step of the generate-then-retrieval paradigm: a free-form
generated relation is scored against every label in the set and snapped to
the nearest one.  The default scorer is a deterministic character n-gram
cosine; an embedding-backed scorer can be plugged in through the same
callable interface.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable

from .model import RelationSet, nfc

# a similarity scorer maps two strings to a score in [0, 1];
# it must be pure, symmetric, and give 1.0 for identical strings
Scorer = Callable[[str, str], float]


@dataclass(frozen=True)
class AlignmentResult:
    query: str
    best: str
    score: float
    ranked: tuple[tuple[str, float], ...]
    exact: bool


def _ngram_counts(s: str) -> Counter:
    """Unigram + sentinel-bigram counts; single-char strings stay unigram-only."""
    counts = Counter(s)
    if len(s) > 1:
        padded = "^" + s + "$"
        counts.update(padded[i : i + 2] for i in range(len(padded) - 1))
    return counts


def _cosine(u: Counter, v: Counter) -> float:
    shared = u.keys() & v.keys()
    dot = sum(u[g] * v[g] for g in shared)
    if dot == 0:
        return 0.0
    nu = math.sqrt(sum(c * c for c in u.values()))
    nv = math.sqrt(sum(c * c for c in v.values()))
    return dot / (nu * nv)


def _char_ngram_score(a: str, b: str) -> float:
    if not a or not b:
        return 1.0 if a == b else 0.0
    if a == b:
        return 1.0
    return _cosine(_ngram_counts(a), _ngram_counts(b))


def default_scorer() -> Scorer:
    """Deterministic character unigram+bigram cosine similarity."""
    return _char_ngram_score


def validate(relation: str, relation_set: RelationSet) -> bool:
    """True iff the relation equals a set label after NFC + edge trim."""
    query = nfc(relation).strip()
    return any(query == nfc(label).strip() for label in relation_set)


def align(
    relation: str,
    relation_set: RelationSet,
    scorer: Scorer | None = None,
    k: int = 1,
) -> AlignmentResult:
    """Rank set labels by similarity to ``relation`` and return the top k.

    An exact match (per validate) pins its label first with score 1.  Ties
    are broken by relation-set file order.
    """
    if not len(relation_set):
        raise ValueError("cannot align against an empty relation set")
    if not 1 <= k <= len(relation_set):
        raise ValueError(f"k must be in [1, {len(relation_set)}], got {k}")
    scorer = scorer or default_scorer()
    query = nfc(relation).strip()

    scored: list[tuple[float, int, int, str]] = []
    exact = False
    for idx, label in enumerate(relation_set.labels):
        canon = nfc(label).strip()
        if canon == query:
            exact = True
            scored.append((1.0, 0, idx, label))
        else:
            scored.append((float(scorer(query, canon)), 1, idx, label))
    scored.sort(key=lambda item: (-item[0], item[1], item[2]))

    ranked = tuple((label, score) for score, _, _, label in scored[:k])
    best, best_score = ranked[0]
    return AlignmentResult(
        query=relation, best=best, score=best_score, ranked=ranked, exact=exact
    )
