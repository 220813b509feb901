"""Parse model-generated answers back into relation triplets.

Strict mode accepts only the canonical grammar, all-or-nothing; lenient
mode absorbs the sloppiness real models produce (full-width punctuation,
missing parentheses, leading chatter) and reports what it skipped.
"""

from dscre import LENIENT, STRICT, RelationTriplet, parse, render

answers = [
    "([双汇国际], 分析, [双汇])",
    "([A], self, [B]), ([B], analysis, [A])",
    "（[甲]，拥有，[乙]）",                    # full-width punctuation
    "[甲], 拥有, [乙]",                        # missing outer parentheses
    "好的，答案是 ([甲], 拥有, [乙]) 供参考",  # chatter around the answer
    "拥有关系",                                # free text, no triplet at all
]

for text in answers:
    strict = parse(text, STRICT)
    lenient = parse(text, LENIENT)
    print(f"answer: {text!r}")
    print(f"  strict : {len(strict.triplets)} triplet(s), {len(strict.diagnostics)} diagnostic(s)")
    print(f"  lenient: {len(lenient.triplets)} triplet(s)", end="")
    for position, message in lenient.diagnostics:
        print(f"  [{position}: {message}]", end="")
    print()

print("\n== rendering is the exact inverse of strict parsing ==")
triplets = [
    RelationTriplet("双汇国际", "分析", "双汇"),
    RelationTriplet("阿里巴巴", "拥有", "蚂蚁金服"),
]
text = render(triplets)
print("rendered:", text)
print("round-trip equal:", list(parse(text, STRICT).triplets) == triplets)
