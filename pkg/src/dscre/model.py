"""Core value types shared by every stage of the relation-extraction pipeline.

All types are immutable after construction and safe to share between
threads.  Text is always indexed by Unicode codepoint, never by byte:
Chinese has no whitespace tokenization, so character offsets are the only
deterministic, tokenizer-independent coordinate system.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from pathlib import Path


def nfc(text: str) -> str:
    """NFC-normalize a string (composed/decomposed forms occur in corpora)."""
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class Sentence:
    """A source sentence, indexed by codepoint."""

    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("sentence text must be non-empty")

    def __len__(self) -> int:
        return len(self.text)


@dataclass(frozen=True)
class Entity:
    """An entity mention: a surface string, optionally with codepoint span."""

    surface: str
    span: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValueError("entity surface must be non-empty")
        if self.span is not None:
            start, end = self.span
            if not (0 <= start < end):
                raise ValueError(f"invalid entity span {self.span!r}")

    def matches(self, sentence: Sentence) -> bool:
        """True if the span (when present) extracts this surface."""
        if self.span is None:
            return True
        start, end = self.span
        return sentence.text[start:end] == self.surface


@dataclass(frozen=True)
class RelationTriplet:
    """An ordered (head, relation, tail) fact.

    ``origin`` records provenance ("gold" or "parsed") and is excluded from
    equality so parsed triplets compare equal to their gold counterparts.
    """

    head: str
    relation: str
    tail: str
    origin: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not (self.head and self.relation and self.tail):
            raise ValueError("triplet fields must all be non-empty")


@dataclass(frozen=True)
class RelationSet:
    """The closed inventory of relation labels for a dataset.

    Label order is significant (it is the tie-break everywhere a
    deterministic ordering over labels is needed).  The exact ASCII label
    "NA" designates the no-relation class when present.
    """

    labels: tuple[str, ...]
    na_label: str | None = None

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("relation labels must be unique")
        if self.na_label is not None and self.na_label not in self.labels:
            raise ValueError(f"na_label {self.na_label!r} not in labels")

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        return self.labels.index(label)

    @classmethod
    def from_file(cls, path: str | Path) -> "RelationSet":
        """Load a relation set: UTF-8, one label per line, order significant."""
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        labels = tuple(nfc(line.strip()) for line in lines if line.strip())
        na = "NA" if "NA" in labels else None
        return cls(labels=labels, na_label=na)


@dataclass(frozen=True)
class REInstance:
    """One dataset record: a sentence, an entity pair, and its gold relations.

    ``gold_relations`` is duplicate-free and keeps a deterministic order
    (loaders order it by relation-set file order).
    """

    id: str
    sentence: Sentence
    head: Entity
    tail: Entity
    gold_relations: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.gold_relations:
            raise ValueError(f"instance {self.id!r} has no gold relations")
        if len(set(self.gold_relations)) != len(self.gold_relations):
            raise ValueError(f"instance {self.id!r} has duplicate gold relations")
        for ent, name in ((self.head, "head"), (self.tail, "tail")):
            if ent.span is not None:
                if not ent.matches(self.sentence):
                    raise ValueError(
                        f"instance {self.id!r}: {name} span does not extract "
                        f"{ent.surface!r}"
                    )
            elif not find_occurrences(self.sentence, ent.surface):
                raise ValueError(
                    f"instance {self.id!r}: {name} surface {ent.surface!r} "
                    "neither occurs in the sentence nor carries a span"
                )

    def unknown_relations(self, relation_set: RelationSet) -> tuple[str, ...]:
        """Gold labels not contained in the given relation set."""
        return tuple(r for r in self.gold_relations if r not in relation_set)


def find_occurrences(sentence: Sentence, surface: str) -> list[tuple[int, int]]:
    """All non-overlapping occurrences of ``surface``, left-to-right greedy.

    Spans are codepoint offsets, pairwise non-overlapping and sorted by
    start.  An empty result is a valid answer.
    """
    if not surface:
        raise ValueError("surface must be non-empty")
    text = sentence.text
    spans: list[tuple[int, int]] = []
    pos = 0
    while True:
        hit = text.find(surface, pos)
        if hit < 0:
            return spans
        spans.append((hit, hit + len(surface)))
        pos = hit + len(surface)
