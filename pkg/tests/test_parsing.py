from __future__ import annotations

import random

import pytest

from dscre.model import RelationTriplet
from dscre.parsing import LENIENT, STRICT, ParseConfig, RenderError, parse, render

# field alphabet for round-trip generation: no grammar delimiters, and no
# edge whitespace (the grammar trims fields at their token boundaries)
FIELD_CHARS = "双汇国际分析拥有持股abcXYZ01自己 -_的"


def random_field(rng: random.Random, allow_space: bool) -> str:
    chars = FIELD_CHARS if allow_space else FIELD_CHARS.replace(" ", "")
    while True:
        s = "".join(rng.choice(chars) for _ in range(rng.randint(1, 8)))
        if s.strip() == s and s:
            return s


def random_triplets(rng: random.Random, n: int) -> list[RelationTriplet]:
    return [
        RelationTriplet(
            head=random_field(rng, allow_space=True),
            relation=random_field(rng, allow_space=True),
            tail=random_field(rng, allow_space=True),
        )
        for _ in range(n)
    ]


class TestStrictGrammar:
    def test_single_canonical_triplet(self):
        outcome = parse("([双汇国际], 分析, [双汇])", STRICT)
        assert outcome.ok
        assert outcome.triplets == (RelationTriplet("双汇国际", "分析", "双汇"),)

    def test_two_triplets_in_order(self):
        outcome = parse("([A], self, [B]), ([B], analysis, [A])", STRICT)
        assert outcome.ok
        assert [t.relation for t in outcome.triplets] == ["self", "analysis"]
        assert outcome.triplets[0].head == "A"
        assert outcome.triplets[1].head == "B"

    def test_arbitrary_whitespace_between_tokens(self):
        outcome = parse("(  [甲]  ,  拥有 ,\n [乙]  )", STRICT)
        assert outcome.ok
        assert outcome.triplets == (RelationTriplet("甲", "拥有", "乙"),)

    def test_strict_is_all_or_nothing(self):
        outcome = parse("([甲], 拥有, [乙]), (broken", STRICT)
        assert outcome.triplets == ()
        assert outcome.diagnostics

    def test_strict_rejects_fullwidth(self):
        outcome = parse("（[甲]，拥有，[乙]）", STRICT)
        assert outcome.triplets == ()
        assert len(outcome.diagnostics) == 1

    def test_strict_rejects_trailing_separator(self):
        outcome = parse("([甲], 拥有, [乙]),", STRICT)
        assert outcome.triplets == ()
        assert any("trailing" in msg for _, msg in outcome.diagnostics)

    def test_empty_answer(self):
        for text in ("", "   ", "\n\t"):
            outcome = parse(text, STRICT)
            assert outcome.triplets == ()
            assert outcome.diagnostics == ((0, "empty answer"),)


class TestLenientNormalizations:
    def test_fullwidth_punctuation(self):
        outcome = parse("（[甲]，拥有，[乙]）", LENIENT)
        assert outcome.triplets == (RelationTriplet("甲", "拥有", "乙"),)
        assert not outcome.diagnostics

    def test_missing_outer_parentheses(self):
        outcome = parse("[甲], 拥有, [乙]", LENIENT)
        assert outcome.triplets == (RelationTriplet("甲", "拥有", "乙"),)
        assert any("parenthes" in msg for _, msg in outcome.diagnostics)

    def test_trailing_separator_accepted(self):
        outcome = parse("([甲], 拥有, [乙]), ", LENIENT)
        assert outcome.triplets == (RelationTriplet("甲", "拥有", "乙"),)

    def test_leading_and_trailing_junk_with_diagnostics(self):
        outcome = parse("答案是 ([甲], 拥有, [乙]) 供参考", LENIENT)
        assert outcome.triplets == (RelationTriplet("甲", "拥有", "乙"),)
        messages = [msg for _, msg in outcome.diagnostics]
        assert any("before" in m for m in messages)
        assert any("after" in m for m in messages)

    def test_enumeration_comma_separator(self):
        outcome = parse("([甲], 拥有, [乙])、([乙], 分析, [甲])", LENIENT)
        assert len(outcome.triplets) == 2

    def test_lenient_recovers_good_triplets_around_bad(self):
        outcome = parse("([甲], 拥有, [乙]), (oops), ([乙], 分析, [甲])", LENIENT)
        assert len(outcome.triplets) == 2
        assert outcome.diagnostics

    def test_free_text_yields_no_triplets(self):
        outcome = parse("拥有关系", LENIENT)
        assert outcome.triplets == ()
        assert outcome.diagnostics

    def test_lenient_superset_property(self):
        rng = random.Random(11)
        for _ in range(200):
            triplets = random_triplets(rng, rng.randint(1, 4))
            text = render(triplets)
            strict = parse(text, STRICT)
            lenient = parse(text, LENIENT)
            assert strict.ok
            assert strict.triplets == lenient.triplets


class TestRender:
    def test_canonical_single(self):
        assert render([RelationTriplet("A", "r", "B")]) == "([A], r, [B])"

    def test_join_with_comma_space(self):
        text = render(
            [RelationTriplet("A", "r1", "B"), RelationTriplet("B", "r2", "A")]
        )
        assert text == "([A], r1, [B]), ([B], r2, [A])"

    def test_empty_list_rejected(self):
        with pytest.raises(RenderError):
            render([])

    def test_comma_bearing_relation_unrenderable(self):
        with pytest.raises(RenderError):
            render([RelationTriplet("A", "r,s", "B")])

    def test_bracket_bearing_entity_unrenderable(self):
        with pytest.raises(RenderError):
            render([RelationTriplet("A]", "r", "B")])

    def test_roundtrip_property(self):
        rng = random.Random(3)
        for _ in range(1000):
            triplets = random_triplets(rng, rng.randint(1, 5))
            outcome = parse(render(triplets), STRICT)
            assert outcome.ok
            assert list(outcome.triplets) == triplets


class TestTotality:
    def test_fuzz_never_crashes_and_positions_in_range(self):
        rng = random.Random(1234)
        pool = "([)],，（）［］、?！ \n\tabc双汇分析拥有\x00\x7f∀𝄞"
        for _ in range(2000):
            text = "".join(rng.choice(pool) for _ in range(rng.randint(0, 40)))
            for config in (STRICT, LENIENT):
                outcome = parse(text, config)
                for position, _ in outcome.diagnostics:
                    assert 0 <= position <= len(text)

    def test_random_codepoint_fuzz(self):
        rng = random.Random(99)
        for _ in range(500):
            text = "".join(
                chr(rng.randint(1, 0x10FFFF))
                for _ in range(rng.randint(0, 25))
                if True
            )
            # skip surrogate range, which plain str cannot round-trip
            text = "".join(c for c in text if not 0xD800 <= ord(c) <= 0xDFFF)
            for config in (STRICT, LENIENT):
                outcome = parse(text, config)
                for position, _ in outcome.diagnostics:
                    assert 0 <= position <= len(text)

    def test_lossily_decoded_bytes_fuzz(self):
        rng = random.Random(4242)
        for _ in range(500):
            raw = bytes(rng.randrange(256) for _ in range(rng.randint(0, 30)))
            for text in (
                raw.decode("utf-8", errors="replace"),
                raw.decode("utf-8", errors="surrogateescape"),
            ):
                for config in (STRICT, LENIENT):
                    outcome = parse(text, config)
                    for position, _ in outcome.diagnostics:
                        assert 0 <= position <= len(text)


def test_parse_config_validation():
    with pytest.raises(ValueError):
        ParseConfig("fuzzy")
