from __future__ import annotations

import json
from pathlib import Path
from types import SimpleNamespace

import pytest

from dscre.instruct import (
    BuildConfig,
    BuildError,
    EntityNotFoundError,
    build_dataset,
    build_example,
    mark_entities,
    read_dataset,
    write_dataset,
)
from dscre.model import Entity, REInstance, Sentence
from dscre.parsing import STRICT, parse

FIXTURES = Path(__file__).parent / "fixtures"


def make_instance(sentence, head, tail, relations, id="t-1"):
    return REInstance(
        id=id,
        sentence=Sentence(sentence),
        head=Entity(head),
        tail=Entity(tail),
        gold_relations=tuple(relations),
    )


class TestMarkEntities:
    def test_nested_shorter_entity_not_marked(self):
        sentence = Sentence("双汇国际控股双汇")
        marked = mark_entities(sentence, Entity("双汇国际"), Entity("双汇"))
        assert marked == "[双汇国际]控股[双汇]"

    def test_missing_entity_raises(self):
        sentence = Sentence("万科发布年度报告")
        with pytest.raises(EntityNotFoundError):
            mark_entities(sentence, Entity("万科"), Entity("绿地"))

    def test_equal_surfaces_marked_once(self):
        sentence = Sentence("双汇与双汇合作")
        marked = mark_entities(sentence, Entity("双汇"), Entity("双汇"))
        assert marked == "[双汇]与[双汇]合作"
        assert "[[" not in marked

    def test_every_occurrence_of_both_entities_marked(self):
        sentence = Sentence("腾讯投资京东，京东感谢腾讯")
        marked = mark_entities(sentence, Entity("腾讯"), Entity("京东"))
        assert marked == "[腾讯]投资[京东]，[京东]感谢[腾讯]"

    def test_stripping_markers_recovers_sentence(self):
        sentence = Sentence("双汇国际控股双汇")
        marked = mark_entities(sentence, Entity("双汇国际"), Entity("双汇"))
        assert marked.replace("[", "").replace("]", "") == sentence.text

    def test_span_used_when_surface_absent(self):
        # cannot happen for span-validated instances, but mark_entities
        # accepts free-standing entities too
        sentence = Sentence("甲乙丙丁")
        marked = mark_entities(sentence, Entity("甲乙"), Entity("丙丁", span=(2, 4)))
        assert marked == "[甲乙][丙丁]"


class TestBuildExample:
    def test_full_config_single_relation(self):
        inst = make_instance("双汇国际控股双汇", "双汇国际", "双汇", ["分析"])
        ex = build_example(inst, BuildConfig())
        assert ex.input == "[双汇国际]控股[双汇]\n([双汇国际], ?, [双汇])"
        assert ex.output == "([双汇国际], 分析, [双汇])"
        assert ex.instruction == (
            "Please extract the relation based on the given sentence and entities."
        )
        assert ex.source_id == "t-1"

    def test_multi_relation_outputs_joined(self):
        inst = make_instance(
            "随着蚂蚁金服的成立，阿里巴巴在金融业务的布局正式明晰",
            "阿里巴巴",
            "蚂蚁金服",
            ["拥有", "成立"],
        )
        ex = build_example(inst, BuildConfig())
        assert ex.output == "([阿里巴巴], 拥有, [蚂蚁金服]), ([阿里巴巴], 成立, [蚂蚁金服])"

    def test_all_knobs_off_na(self):
        inst = make_instance("发布会上万科与绿地集团代表均出席了活动", "万科", "绿地集团", ["NA"])
        ex = build_example(inst, BuildConfig(em=False, at=False, tr=False))
        assert ex.input == inst.sentence.text
        assert ex.output == "NA"

    def test_em_off_keeps_unbracketed_query(self):
        inst = make_instance("双汇国际控股双汇", "双汇国际", "双汇", ["分析"])
        ex = build_example(inst, BuildConfig(em=False))
        assert ex.input == "双汇国际控股双汇\n(双汇国际, ?, 双汇)"
        # output stays canonical triplet form regardless of EM
        assert ex.output == "([双汇国际], 分析, [双汇])"

    def test_tr_off_outputs_bare_labels(self):
        inst = make_instance(
            "腾讯宣布战略投资京东并达成深度合作", "腾讯", "京东", ["合作", "投资"]
        )
        ex = build_example(inst, BuildConfig(tr=False))
        assert ex.output == "合作,投资"

    def test_ablation_variants_differ_exactly_where_documented(self):
        inst = make_instance("双汇国际控股双汇", "双汇国际", "双汇", ["分析"])
        full = build_example(inst, BuildConfig())
        no_em = build_example(inst, BuildConfig(em=False))
        no_at = build_example(inst, BuildConfig(at=False))
        no_tr = build_example(inst, BuildConfig(tr=False))
        no_at_tr = build_example(inst, BuildConfig(at=False, tr=False))

        assert no_em.input == "双汇国际控股双汇\n(双汇国际, ?, 双汇)"
        assert no_em.output == full.output
        assert no_at.input == "[双汇国际]控股[双汇]"
        assert no_at.output == full.output
        assert no_tr.input == full.input
        assert no_tr.output == "分析"
        assert no_at_tr.input == no_at.input
        assert no_at_tr.output == no_tr.output
        assert all(v.instruction == full.instruction for v in (no_em, no_at, no_tr, no_at_tr))

    def test_builder_parser_roundtrip(self, finre_train):
        for inst in finre_train:
            ex = build_example(inst, BuildConfig())
            outcome = parse(ex.output, STRICT)
            assert outcome.ok
            assert [t.relation for t in outcome.triplets] == list(inst.gold_relations)
            assert all(t.head == inst.head.surface for t in outcome.triplets)
            assert all(t.tail == inst.tail.surface for t in outcome.triplets)

    def test_bracket_balance_and_strip_invariants(self, finre_train):
        for inst in finre_train:
            for config in (BuildConfig(), BuildConfig(em=False), BuildConfig(at=False)):
                ex = build_example(inst, config)
                assert ex.input.count("[") == ex.input.count("]")
                body = ex.input.split("\n")[0] if config.at else ex.input
                assert body.replace("[", "").replace("]", "") == inst.sentence.text

    def test_determinism(self, finre_train):
        config = BuildConfig()
        first = [build_example(i, config) for i in finre_train]
        second = [build_example(i, config) for i in finre_train]
        assert first == second


class TestBuildDataset:
    def test_order_preserving(self, finre_train):
        examples = build_dataset(finre_train, BuildConfig())
        assert [e.source_id for e in examples] == [i.id for i in finre_train]

    def test_fail_fast_names_instance(self):
        good = make_instance("腾讯投资京东", "腾讯", "京东", ["投资"], id="ok-1")
        # REInstance validates entity presence at construction, so a missing
        # entity only reaches the builder through unvalidated record objects
        bad = SimpleNamespace(
            id="bad-2",
            sentence=Sentence("万科发布报告"),
            head=Entity("万科"),
            tail=Entity("绿地"),
            gold_relations=("NA",),
        )
        with pytest.raises(BuildError) as excinfo:
            build_dataset([good, bad], BuildConfig())
        assert "bad-2" in str(excinfo.value)

    def test_golden_file(self, finre_train, tmp_path):
        examples = build_dataset(finre_train, BuildConfig())
        out = tmp_path / "built.json"
        write_dataset(examples, out)
        golden = (FIXTURES / "golden_instructions_full.json").read_text(encoding="utf-8")
        assert out.read_text(encoding="utf-8") == golden

    def test_dataset_file_roundtrip(self, finre_train, tmp_path):
        examples = build_dataset(finre_train, BuildConfig())
        out = tmp_path / "ds.json"
        write_dataset(examples, out)
        records = read_dataset(out)
        assert len(records) == len(examples)
        assert records[0] == {
            "instruction": examples[0].instruction,
            "input": examples[0].input,
            "output": examples[0].output,
        }
        # one record per line inside the array, so line = index + 2
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "["
        assert json.loads(lines[1].rstrip(",")) == records[0]

    def test_empty_dataset_file(self, tmp_path):
        out = tmp_path / "empty.json"
        write_dataset([], out)
        assert read_dataset(out) == []
