"""Dataset loading: canonical JSONL and TSV records into REInstance streams.

Canonical format is one JSON record per line with fields ``id``,
``sentence``, ``head``, ``tail``, ``relations`` (list) and optional
``head_span``/``tail_span``; UTF-8, LF line endings, no BOM.  TSV is
tab-delimited without quoting, one relation per row.

Records that share (sentence, head, tail) are merged into a single
multi-relation instance at load time, and the merged relation list is
ordered by relation-set file order so downstream output is deterministic.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import TypeVar

from .model import Entity, REInstance, RelationSet, Sentence

log = logging.getLogger(__name__)

T = TypeVar("T")

SPLIT_NAMES = ("train", "dev", "test")
FORMATS = ("canonical-jsonl", "tsv")
DEFAULT_TSV_COLUMNS = ("head", "tail", "relation", "sentence")


class MalformedRecordError(ValueError):
    """A source line that cannot be decoded into a record."""

    def __init__(self, path: str | Path, line_no: int, raw: str, reason: str):
        self.path = str(path)
        self.line_no = line_no
        self.raw = raw
        super().__init__(f"{path}:{line_no}: {reason} (record: {raw!r})")


class UnknownRelationError(ValueError):
    """A gold label outside the declared relation set (reject policy)."""


@dataclass(frozen=True)
class DatasetManifest:
    """Names the split files and relation set of one dataset."""

    name: str
    splits: dict[str, Path]
    relation_set_path: Path
    format: str = "canonical-jsonl"
    tsv_columns: tuple[str, ...] = DEFAULT_TSV_COLUMNS

    def __post_init__(self) -> None:
        if self.format not in FORMATS:
            raise ValueError(f"unknown dataset format {self.format!r}")
        bad = set(self.splits) - set(SPLIT_NAMES)
        if bad:
            raise ValueError(f"unknown split names: {sorted(bad)}")
        if sorted(self.tsv_columns) != sorted(DEFAULT_TSV_COLUMNS):
            raise ValueError(
                f"tsv_columns must permute {DEFAULT_TSV_COLUMNS}, got {self.tsv_columns}"
            )

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        """Read a manifest JSON file; relative paths resolve against it."""
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        base = path.parent
        return cls(
            name=data["name"],
            splits={k: base / v for k, v in data["splits"].items()},
            relation_set_path=base / data["relation_set"],
            format=data.get("format", "canonical-jsonl"),
            tsv_columns=tuple(data.get("tsv_columns", DEFAULT_TSV_COLUMNS)),
        )

    def relation_set(self) -> RelationSet:
        return RelationSet.from_file(self.relation_set_path)


@dataclass
class _RawRecord:
    id: str
    sentence: str
    head: str
    tail: str
    relations: list[str]
    head_span: tuple[int, int] | None = None
    tail_span: tuple[int, int] | None = None


def _parse_canonical_line(path: Path, line_no: int, line: str) -> _RawRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecordError(path, line_no, line, f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedRecordError(path, line_no, line, "record is not an object")
    try:
        relations = obj["relations"]
        if not isinstance(relations, list) or not relations:
            raise MalformedRecordError(
                path, line_no, line, "relations must be a non-empty list"
            )
        return _RawRecord(
            id=str(obj["id"]),
            sentence=obj["sentence"],
            head=obj["head"],
            tail=obj["tail"],
            relations=[str(r) for r in relations],
            head_span=tuple(obj["head_span"]) if obj.get("head_span") else None,
            tail_span=tuple(obj["tail_span"]) if obj.get("tail_span") else None,
        )
    except KeyError as exc:
        raise MalformedRecordError(path, line_no, line, f"missing field {exc}") from exc


def _parse_tsv_line(
    path: Path, line_no: int, line: str, columns: tuple[str, ...]
) -> _RawRecord:
    cells = line.split("\t")
    if len(cells) != len(columns):
        raise MalformedRecordError(
            path, line_no, line, f"expected {len(columns)} tab-separated columns"
        )
    row = dict(zip(columns, cells))
    return _RawRecord(
        id=f"{path.stem}-{line_no}",
        sentence=row["sentence"],
        head=row["head"],
        tail=row["tail"],
        relations=[row["relation"]],
    )


def load_split(
    manifest: DatasetManifest, split: str, *, on_unknown: str = "reject"
) -> list[REInstance]:
    """Load one split as merged REInstances, in stable file order.

    ``on_unknown`` controls gold labels outside the relation set:
    "reject" raises UnknownRelationError, "warn" logs and keeps them.
    """
    if split not in manifest.splits:
        raise ValueError(f"manifest {manifest.name!r} has no split {split!r}")
    if on_unknown not in ("reject", "warn"):
        raise ValueError(f"on_unknown must be 'reject' or 'warn', got {on_unknown!r}")
    path = Path(manifest.splits[split])
    if not path.exists():
        raise FileNotFoundError(f"split file not found: {path}")
    relation_set = manifest.relation_set()

    merged: dict[tuple[str, str, str], _RawRecord] = {}
    order: list[tuple[str, str, str]] = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if manifest.format == "canonical-jsonl":
                rec = _parse_canonical_line(path, line_no, line)
            else:
                rec = _parse_tsv_line(path, line_no, line, manifest.tsv_columns)
            for rel in rec.relations:
                if rel not in relation_set:
                    if on_unknown == "reject":
                        raise UnknownRelationError(
                            f"{path}:{line_no}: relation {rel!r} not in "
                            f"{manifest.relation_set_path}"
                        )
                    log.warning("%s:%d: keeping unknown relation %r", path, line_no, rel)
            key = (rec.sentence, rec.head, rec.tail)
            if key in merged:
                known = merged[key]
                for rel in rec.relations:
                    if rel not in known.relations:
                        known.relations.append(rel)
            else:
                merged[key] = rec
                order.append(key)

    instances = []
    for key in order:
        rec = merged[key]
        instances.append(
            REInstance(
                id=rec.id,
                sentence=Sentence(rec.sentence),
                head=Entity(rec.head, rec.head_span),
                tail=Entity(rec.tail, rec.tail_span),
                gold_relations=_ordered_relations(rec.relations, relation_set),
            )
        )
    return instances


def _ordered_relations(
    relations: list[str], relation_set: RelationSet
) -> tuple[str, ...]:
    # set members by file order first, unknown-but-kept labels after
    known = sorted(
        (r for r in relations if r in relation_set), key=relation_set.index
    )
    unknown = [r for r in relations if r not in relation_set]
    return tuple(known + unknown)


def write_canonical(instances: list[REInstance], path: str | Path) -> None:
    """Emit canonical JSONL; loading the result back is a fixed point."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for inst in instances:
            record: dict = {
                "id": inst.id,
                "sentence": inst.sentence.text,
                "head": inst.head.surface,
                "tail": inst.tail.surface,
                "relations": list(inst.gold_relations),
            }
            if inst.head.span is not None:
                record["head_span"] = list(inst.head.span)
            if inst.tail.span is not None:
                record["tail_span"] = list(inst.tail.span)
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def sample_fraction(
    instances: list[T], fraction: float | Fraction, seed: int
) -> list[T]:
    """Draw floor(fraction * N) instances without replacement, seeded.

    fraction = 1 returns the full list unchanged.  The sampled subset keeps
    original file order.  Selection uses a partial Fisher-Yates shuffle
    driven only by random.Random().random(), whose stream is stable across
    Python versions, so equal seeds give equal subsets forever.
    """
    frac = fraction if isinstance(fraction, Fraction) else Fraction(str(fraction))
    if not 0 < frac <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if frac == 1:
        return list(instances)
    n = len(instances)
    k = math.floor(frac * n)
    rng = random.Random(seed)
    idx = list(range(n))
    for i in range(k):
        j = i + int(rng.random() * (n - i))
        j = min(j, n - 1)
        idx[i], idx[j] = idx[j], idx[i]
    return [instances[i] for i in sorted(idx[:k])]
