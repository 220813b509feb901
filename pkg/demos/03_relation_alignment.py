"""Snap free-form generated relations onto a closed relation set.

The default scorer is a character unigram+bigram cosine, so alignment is
deterministic and needs no model.  Any callable (str, str) -> [0, 1] can
replace it, e.g. an embedding similarity.
"""

from pathlib import Path

from dscre import RelationSet, align, default_scorer, validate

labels_file = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "finre_labels.txt"
relation_set = RelationSet.from_file(labels_file)
scorer = default_scorer()

print(f"relation set: {len(relation_set)} labels, no-relation label = {relation_set.na_label}")

print("\n== validation is exact membership (NFC + edge trim) ==")
for query in ("分析", " 分析 ", "分 析", "关联啊"):
    print(f"  validate({query!r}) = {validate(query, relation_set)}")

print("\n== near-miss generations align to their nearest label ==")
for query in ("拥", "持有", "收购了", "竞争关系", "分析分析"):
    result = align(query, relation_set, scorer, k=3)
    ranked = ", ".join(f"{label}:{score:.3f}" for label, score in result.ranked)
    print(f"  {query!r:12} -> best {result.best!r} (exact={result.exact})   top-3: {ranked}")

print("\n== exact labels short-circuit with score 1 ==")
result = align("重组", relation_set, scorer)
print(f"  {result.query!r} -> {result.best!r}, score {result.score}, exact={result.exact}")
