"""Build instruction-tuning examples from relation-extraction records.

Walks through the three layout knobs: entity markers in the sentence,
the appended query triplet, and triplet-form outputs.
"""

from dscre import BuildConfig, Entity, REInstance, Sentence, build_example

instance = REInstance(
    id="demo-1",
    sentence=Sentence("双汇国际在报告中深入分析了双汇的盈利前景"),
    head=Entity("双汇国际"),
    tail=Entity("双汇"),
    gold_relations=("分析",),
)

multi = REInstance(
    id="demo-2",
    sentence=Sentence("随着蚂蚁金服的成立，阿里巴巴在金融业务的布局正式明晰"),
    head=Entity("阿里巴巴"),
    tail=Entity("蚂蚁金服"),
    gold_relations=("拥有", "成立"),
)

print("== the full layout (all knobs on) ==")
example = build_example(instance)
print("instruction:", example.instruction)
print("input:      ", example.input.replace("\n", "  |  "))
print("output:     ", example.output)

print("\n== multiple relations render as a comma-joined triplet list ==")
print("output:     ", build_example(multi).output)

print("\n== each knob changes exactly one documented thing ==")
for name, config in [
    ("w/o entity markers", BuildConfig(em=False)),
    ("w/o query triplet", BuildConfig(at=False)),
    ("w/o triplet output", BuildConfig(tr=False)),
    ("w/o query + triplet", BuildConfig(at=False, tr=False)),
]:
    variant = build_example(instance, config)
    print(f"{name:22}  input: {variant.input.replace(chr(10), '  |  ')}")
    print(f"{'':22}  output: {variant.output}")
