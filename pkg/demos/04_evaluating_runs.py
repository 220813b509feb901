"""Score prediction runs against gold and break errors into categories.

Counting is micro-averaged over (instance, relation) decisions; every
mis-predicted instance lands in exactly one error category.
"""

from dscre import (
    Entity,
    PredictionRecord,
    REInstance,
    RelationSet,
    RelationTriplet,
    Sentence,
    aggregate,
    compare_runs,
)

relation_set = RelationSet(
    labels=("NA", "分析", "拥有", "成立", "持股", "竞争", "收购"), na_label="NA"
)

PAIRS = {
    "1": ("甲公司", "乙公司"),
    "2": ("丙集团", "丁银行"),
    "3": ("戊科技", "己控股"),
    "4": ("庚证券", "辛基金"),
}


def gold(id, *relations):
    head, tail = PAIRS[id]
    return REInstance(
        id=id,
        sentence=Sentence(f"{head}与{tail}签署协议"),
        head=Entity(head),
        tail=Entity(tail),
        gold_relations=relations,
    )


def prediction(id, relations, swapped=()):
    head, tail = PAIRS[id]
    parsed = [RelationTriplet(head, r, tail) for r in relations]
    parsed += [RelationTriplet(tail, r, head) for r in swapped]
    return PredictionRecord(instance_id=id, raw_answer=",".join(relations), parsed=tuple(parsed))


golds = [gold("1", "分析"), gold("2", "拥有", "成立"), gold("3", "持股"), gold("4", "收购")]

print("== a run with three kinds of mistakes ==")
flawed = [
    (golds[0], prediction("1", ["分析"])),                 # correct
    (golds[1], prediction("2", ["拥有"])),                 # missed second relation
    (golds[2], prediction("3", ["竞争"])),                 # wrong relation
    (golds[3], prediction("4", ["收购"], swapped=["收购"])),  # stray reversed pair
]
report = aggregate(flawed, relation_set)
print(f"tp={report.tp} fp={report.fp} fn={report.fn}")
print(f"P={report.precision:.4f} R={report.recall:.4f} F1={report.f1:.4f} (macro {report.macro_f1:.4f})")
print("taxonomy:", report.error_taxonomy)

print("\n== comparing runs flags the best cell per column ==")
perfect = aggregate(
    [(g, prediction(g.id, list(g.gold_relations))) for g in golds], relation_set
)
comparison = compare_runs([("flawed", report), ("perfect", perfect)])
print(comparison.text)
