"""Score predicted triplets against gold and classify what went wrong.

Counting is micro-averaged over (instance, relation) decisions: a
predicted relation for the instance's entity pair is a true positive when
it is in the gold set, a false positive otherwise; unmatched gold
relations are false negatives.  Triplets naming a different or reversed
pair count as false positives and leave gold relations unmatched.  Entity
comparison strips "[ ]" markers and trims whitespace, nothing fuzzier.

Every mis-predicted instance falls in exactly one error category, checked
in precedence order:

1. nonexistent   — some predicted relation is not in the relation set
2. na            — the gold relation is exactly the no-relation label
3. multi_relation — the instance carries two or more gold relations
4. understanding — everything else
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .align import validate
from .model import REInstance, RelationSet, RelationTriplet, nfc

ERROR_CATEGORIES = ("understanding", "multi_relation", "na", "nonexistent")


@dataclass(frozen=True)
class PredictionRecord:
    """One model answer for one instance, raw and in parsed form."""

    instance_id: str
    raw_answer: str
    parsed: tuple[RelationTriplet, ...] = ()
    aligned_relations: tuple[tuple[str, bool], ...] = ()

    def __post_init__(self) -> None:
        if self.aligned_relations and len(self.aligned_relations) != len(self.parsed):
            raise ValueError(
                f"record {self.instance_id!r}: aligned_relations must match parsed length"
            )


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    per_label: dict[str, tuple[int, int, int, float]]
    error_taxonomy: dict[str, int]
    n_instances: int
    n_errors: int
    macro_f1: float


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _clean(surface: str) -> str:
    return nfc(surface.replace("[", "").replace("]", "")).strip()


def _predicted(gold: REInstance, pred: PredictionRecord):
    """Split predictions into pair-matching relation labels and off-pair triplets.

    When alignment ran, the aligned label stands in for the raw parsed
    relation.  Both outputs are deduplicated and keep first-seen order.
    """
    gold_head = _clean(gold.head.surface)
    gold_tail = _clean(gold.tail.surface)
    pair_relations: list[str] = []
    off_pair: list[RelationTriplet] = []
    seen_off: set[tuple[str, str, str]] = set()
    for idx, triplet in enumerate(pred.parsed):
        relation = (
            pred.aligned_relations[idx][0] if pred.aligned_relations else triplet.relation
        )
        relation = nfc(relation).strip()
        head = _clean(triplet.head)
        tail = _clean(triplet.tail)
        if head == gold_head and tail == gold_tail:
            if relation not in pair_relations:
                pair_relations.append(relation)
        elif (head, relation, tail) not in seen_off:
            seen_off.add((head, relation, tail))
            off_pair.append(RelationTriplet(head, relation, tail, origin="parsed"))
    return pair_relations, off_pair


def _gold_set(gold: REInstance) -> set[str]:
    return {nfc(r).strip() for r in gold.gold_relations}


def score_instance(
    gold: REInstance, pred: PredictionRecord, relation_set: RelationSet
) -> tuple[int, int, int]:
    """Micro (tp, fp, fn) for one instance."""
    if gold.id != pred.instance_id:
        raise ValueError(f"id mismatch: gold {gold.id!r} vs prediction {pred.instance_id!r}")
    pair_relations, off_pair = _predicted(gold, pred)
    gold_relations = _gold_set(gold)
    predicted = set(pair_relations)
    tp = len(predicted & gold_relations)
    fp = len(predicted - gold_relations) + len(off_pair)
    fn = len(gold_relations - predicted)
    return tp, fp, fn


def classify_error(
    gold: REInstance, pred: PredictionRecord, relation_set: RelationSet
) -> str:
    """Assign the single error category of a mis-predicted instance."""
    pair_relations, off_pair = _predicted(gold, pred)
    gold_relations = _gold_set(gold)
    if set(pair_relations) == gold_relations and not off_pair:
        raise ValueError(f"instance {gold.id!r} was predicted correctly")
    generated = pair_relations + [t.relation for t in off_pair]
    if any(not validate(r, relation_set) for r in generated):
        return "nonexistent"
    if relation_set.na_label is not None and gold_relations == {relation_set.na_label}:
        return "na"
    if len(gold_relations) >= 2:
        return "multi_relation"
    return "understanding"


def aggregate(
    records: list[tuple[REInstance, PredictionRecord]],
    relation_set: RelationSet,
    exclude_na: bool = False,
) -> EvalReport:
    """Micro-aggregate scores over id-matched (gold, prediction) pairs.

    ``exclude_na`` drops instances whose gold set is exactly the
    no-relation label before scoring (sensitivity analysis).  macro_f1
    averages per-label F1 over the labels that appear in gold or
    predictions.
    """
    if not records:
        raise ValueError("nothing to score: empty record list")
    seen_ids: set[str] = set()
    for gold, _ in records:
        if gold.id in seen_ids:
            raise ValueError(f"duplicate instance id {gold.id!r}")
        seen_ids.add(gold.id)
    if exclude_na and relation_set.na_label is not None:
        na = relation_set.na_label
        records = [(g, p) for g, p in records if _gold_set(g) != {na}]
        if not records:
            raise ValueError("nothing to score: all instances were NA-gold")

    tp = fp = fn = 0
    label_counts: dict[str, list[int]] = {}
    taxonomy = {category: 0 for category in ERROR_CATEGORIES}
    n_errors = 0

    def bump(label: str, slot: int) -> None:
        label_counts.setdefault(label, [0, 0, 0])[slot] += 1

    for gold, pred in records:
        pair_relations, off_pair = _predicted(gold, pred)
        gold_relations = _gold_set(gold)
        predicted = set(pair_relations)
        for relation in predicted:
            if relation in gold_relations:
                tp += 1
                bump(relation, 0)
            else:
                fp += 1
                bump(relation, 1)
        for triplet in off_pair:
            fp += 1
            bump(triplet.relation, 1)
        for relation in gold_relations - predicted:
            fn += 1
            bump(relation, 2)
        if predicted != gold_relations or off_pair:
            n_errors += 1
            taxonomy[classify_error(gold, pred, relation_set)] += 1

    precision, recall, f1 = _prf(tp, fp, fn)
    per_label = {
        label: (c[0], c[1], c[2], _prf(*c)[2])
        for label, c in sorted(label_counts.items())
    }
    macro_f1 = (
        sum(entry[3] for entry in per_label.values()) / len(per_label) if per_label else 0.0
    )
    return EvalReport(
        tp=tp,
        fp=fp,
        fn=fn,
        precision=precision,
        recall=recall,
        f1=f1,
        per_label=per_label,
        error_taxonomy=taxonomy,
        n_instances=len(records),
        n_errors=n_errors,
        macro_f1=macro_f1,
    )


@dataclass(frozen=True)
class RunComparison:
    """Rows of named run scores with per-column best flags."""

    rows: tuple[dict, ...]
    text: str


def compare_runs(reports: list[tuple[str, EvalReport]]) -> RunComparison:
    """Tabulate runs side by side; the best cell per column is flagged."""
    if len(reports) < 2:
        raise ValueError("need at least two reports to compare")
    columns = ("precision", "recall", "f1")
    best = {c: max(getattr(r, c) for _, r in reports) for c in columns}
    rows = []
    for name, report in reports:
        row: dict = {"name": name}
        row_best = []
        for column in columns:
            value = getattr(report, column)
            row[column] = round(value * 100, 2)
            if value == best[column]:
                row_best.append(column)
        row["best"] = row_best
        rows.append(row)

    name_width = max(len("run"), max(len(r["name"]) for r in rows))
    lines = [f"{'run':<{name_width}}  {'P':>8}  {'R':>8}  {'F1':>8}"]
    for row in rows:
        cells = []
        for column in columns:
            mark = "*" if column in row["best"] else " "
            cells.append(f"{row[column]:>7.2f}{mark}")
        lines.append(f"{row['name']:<{name_width}}  " + "  ".join(cells))
    return RunComparison(rows=tuple(rows), text="\n".join(lines))


def write_comparison(comparison: RunComparison, path: str | Path) -> None:
    """Machine-readable record of a run comparison."""
    Path(path).write_text(
        json.dumps(list(comparison.rows), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


# -- run / report files --


def write_run(records: list[PredictionRecord], path: str | Path) -> None:
    """One prediction record per line: id, raw answer, triplets, aligned labels."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            obj = {
                "id": record.instance_id,
                "raw_answer": record.raw_answer,
                "parsed": [
                    {"head": t.head, "relation": t.relation, "tail": t.tail}
                    for t in record.parsed
                ],
                "aligned": [
                    {"label": label, "exact": exact}
                    for label, exact in record.aligned_relations
                ],
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def read_run(path: str | Path) -> list[PredictionRecord]:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            records.append(
                PredictionRecord(
                    instance_id=obj["id"],
                    raw_answer=obj["raw_answer"],
                    parsed=tuple(
                        RelationTriplet(t["head"], t["relation"], t["tail"], origin="parsed")
                        for t in obj["parsed"]
                    ),
                    aligned_relations=tuple(
                        (a["label"], bool(a["exact"])) for a in obj["aligned"]
                    ),
                )
            )
    return records


def write_report(report: EvalReport, path: str | Path, config_hash: str = "") -> None:
    """Flat machine-readable record of all report fields."""
    obj = {
        "version": __version__,
        "config_hash": config_hash,
        "tp": report.tp,
        "fp": report.fp,
        "fn": report.fn,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "macro_f1": report.macro_f1,
        "n_instances": report.n_instances,
        "n_errors": report.n_errors,
        "error_taxonomy": report.error_taxonomy,
        "per_label": {
            label: {"tp": c[0], "fp": c[1], "fn": c[2], "f1": c[3]}
            for label, c in report.per_label.items()
        },
    }
    Path(path).write_text(
        json.dumps(obj, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
