from __future__ import annotations

import json
from pathlib import Path


from dscre.cli import main
from dscre.evaluate import PredictionRecord, write_run
from dscre.ingest import write_canonical
from dscre.model import Entity, REInstance, RelationTriplet, Sentence

from .stub_backend import StubBackend

FIXTURES = Path(__file__).parent / "fixtures"
MANIFEST = str(FIXTURES / "finre_sample_manifest.json")
LABELS = str(FIXTURES / "finre_labels.txt")


class TestBuild:
    def test_default_flags_match_golden(self, tmp_path, capsys):
        out = tmp_path / "ds.json"
        assert main(["build", "--dataset", MANIFEST, "--out", str(out)]) == 0
        golden = (FIXTURES / "golden_instructions_full.json").read_bytes()
        assert out.read_bytes() == golden
        assert "10 examples" in capsys.readouterr().out

    def test_no_em_variant(self, tmp_path):
        out = tmp_path / "no_em.json"
        assert main(["build", "--dataset", MANIFEST, "--no-em", "--out", str(out)]) == 0
        records = json.loads(out.read_text(encoding="utf-8"))
        assert records[0]["input"].endswith("(双汇国际, ?, 双汇)")
        assert "[" not in records[0]["input"]

    def test_no_at_no_tr_variant(self, tmp_path):
        out = tmp_path / "no_at_tr.json"
        assert (
            main(["build", "--dataset", MANIFEST, "--no-at", "--no-tr", "--out", str(out)])
            == 0
        )
        records = json.loads(out.read_text(encoding="utf-8"))
        assert "?" not in records[0]["input"]
        assert records[0]["output"] == "分析"

    def test_missing_out_is_usage_error(self):
        assert main(["build", "--dataset", MANIFEST]) == 2

    def test_config_file_and_flag_precedence(self, tmp_path):
        config = tmp_path / "build.conf"
        config.write_text("em = false\ninstruction = From config\n", encoding="utf-8")
        out = tmp_path / "ds.json"
        assert (
            main(
                [
                    "build",
                    "--config", str(config),
                    "--dataset", MANIFEST,
                    "--em",  # flag overrides the config file
                    "--out", str(out),
                ]
            )
            == 0
        )
        records = json.loads(out.read_text(encoding="utf-8"))
        assert records[0]["instruction"] == "From config"
        assert records[0]["input"].startswith("[双汇国际]")

    def test_config_hash_printed(self, tmp_path, capsys):
        out = tmp_path / "ds.json"
        main(["build", "--dataset", MANIFEST, "--out", str(out)])
        assert "config-hash " in capsys.readouterr().err


class TestSample:
    def test_counts_and_determinism(self, tmp_path, capsys):
        src = str(FIXTURES / "finre_train_sample.jsonl")
        out1, out2 = tmp_path / "s1.jsonl", tmp_path / "s2.jsonl"
        assert main(["sample", "--in", src, "--fraction", "0.2", "--seed", "7", "--out", str(out1)]) == 0
        assert "sampled 2 of 10" in capsys.readouterr().out
        assert main(["sample", "--in", src, "--fraction", "0.2", "--seed", "7", "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_full_fraction_identity(self, tmp_path):
        src = FIXTURES / "finre_train_sample.jsonl"
        out = tmp_path / "all.jsonl"
        assert main(["sample", "--in", str(src), "--fraction", "1.0", "--out", str(out)]) == 0
        assert out.read_text(encoding="utf-8") == src.read_text(encoding="utf-8")

    def test_fraction_out_of_range(self, tmp_path):
        src = str(FIXTURES / "finre_train_sample.jsonl")
        code = main(["sample", "--in", src, "--fraction", "1.5", "--out", str(tmp_path / "x")])
        assert code == 2


class TestInfer:
    def test_run_file_and_warm_cache_rerun(self, tmp_path, capsys):
        cache = str(tmp_path / "cache")
        out1, out2 = tmp_path / "run1.jsonl", tmp_path / "run2.jsonl"
        with StubBackend() as stub:
            args = [
                "infer",
                "--dataset", MANIFEST,
                "--split", "test",
                "--paradigm", "finetuned",
                "--backend-url", stub.url,
                "--model", "stub-model",
                "--cache", cache,
            ]
            assert main(args + ["--out", str(out1)]) == 0
            first_requests = stub.requests
            assert main(args + ["--out", str(out2)]) == 0
            assert stub.requests == first_requests
        assert out1.read_bytes() == out2.read_bytes()
        records = [json.loads(line) for line in out1.read_text("utf-8").splitlines()]
        assert records[0]["parsed"][0]["relation"] == "分析"

    def test_backend_unreachable_cold_cache_exits_3(self, tmp_path):
        code = main(
            [
                "infer",
                "--dataset", MANIFEST,
                "--paradigm", "finetuned",
                "--backend-url", "http://127.0.0.1:9",
                "--model", "m",
                "--cache", str(tmp_path / "cache"),
                "--out", str(tmp_path / "run.jsonl"),
                "--retries", "0",
                "--timeout", "0.2",
            ]
        )
        assert code == 3

    def test_missing_relation_set_exits_2(self, tmp_path):
        manifest = tmp_path / "broken.json"
        manifest.write_text(
            json.dumps(
                {
                    "name": "broken",
                    "relation_set": "missing_labels.txt",
                    "splits": {"test": "also_missing.jsonl"},
                }
            ),
            encoding="utf-8",
        )
        code = main(
            [
                "infer",
                "--dataset", str(manifest),
                "--paradigm", "classify_then_extract",
                "--backend-url", "http://127.0.0.1:9",
                "--model", "m",
                "--cache", str(tmp_path / "cache"),
                "--out", str(tmp_path / "run.jsonl"),
            ]
        )
        assert code == 2


def _write_eval_pair(tmp_path, mistakes: bool):
    """Gold file + run file; with mistakes=True it is the hand-scored 0.6 fixture."""
    pairs = {
        "1": ("甲公司", "乙公司"),
        "2": ("丙集团", "丁银行"),
        "3": ("戊科技", "己控股"),
        "4": ("庚证券", "辛基金"),
    }

    def gold(id, relations):
        head, tail = pairs[id]
        return REInstance(
            id=id,
            sentence=Sentence(f"{head}与{tail}签署协议"),
            head=Entity(head),
            tail=Entity(tail),
            gold_relations=tuple(relations),
        )

    def record(id, relations, swapped=()):
        head, tail = pairs[id]
        parsed = [RelationTriplet(head, r, tail) for r in relations]
        parsed += [RelationTriplet(tail, r, head) for r in swapped]
        return PredictionRecord(
            instance_id=id, raw_answer="; ".join(relations), parsed=tuple(parsed)
        )

    golds = [
        gold("1", ["分析"]),
        gold("2", ["拥有", "成立"]),
        gold("3", ["持股"]),
        gold("4", ["收购"]),
    ]
    if mistakes:
        records = [
            record("1", ["分析"]),
            record("2", ["拥有"]),
            record("3", ["竞争"]),
            record("4", ["收购"], swapped=["收购"]),
        ]
    else:
        records = [record(g.id, list(g.gold_relations)) for g in golds]

    gold_path = tmp_path / "gold.jsonl"
    run_path = tmp_path / "run.jsonl"
    write_canonical(golds, gold_path)
    write_run(records, run_path)
    return str(gold_path), str(run_path)


class TestEval:
    def test_perfect_run(self, tmp_path, capsys):
        gold_path, run_path = _write_eval_pair(tmp_path, mistakes=False)
        assert (
            main(["eval", "--gold", gold_path, "--run", run_path, "--relation-set", LABELS])
            == 0
        )
        assert "P 100.00 R 100.00 F1 100.00" in capsys.readouterr().out

    def test_hand_scored_fixture_and_report(self, tmp_path, capsys):
        gold_path, run_path = _write_eval_pair(tmp_path, mistakes=True)
        report = tmp_path / "report.json"
        code = main(
            [
                "eval",
                "--gold", gold_path,
                "--run", run_path,
                "--relation-set", LABELS,
                "--report", str(report),
            ]
        )
        assert code == 0
        output = capsys.readouterr().out
        assert "P 60.00 R 60.00 F1 60.00" in output
        assert "Multiple Relations: 33.33%" in output
        assert "Understanding: 66.67%" in output
        data = json.loads(report.read_text(encoding="utf-8"))
        assert data["tp"] == 3 and data["fp"] == 2 and data["fn"] == 2

    def test_unknown_run_id_exits_2(self, tmp_path):
        gold_path, run_path = _write_eval_pair(tmp_path, mistakes=False)
        bad_run = tmp_path / "bad_run.jsonl"
        lines = Path(run_path).read_text("utf-8").splitlines()
        lines[0] = lines[0].replace('"id": "1"', '"id": "999"')
        bad_run.write_text("\n".join(lines) + "\n", encoding="utf-8")
        code = main(
            ["eval", "--gold", gold_path, "--run", str(bad_run), "--relation-set", LABELS]
        )
        assert code == 2


class TestParseAlign:
    def test_parse_lenient(self, capsys):
        assert main(["parse", "（[甲]，拥有，[乙]）"]) == 0
        out = capsys.readouterr().out
        assert json.loads(out) == {"head": "甲", "relation": "拥有", "tail": "乙"}

    def test_parse_strict_reports_diagnostics(self, capsys):
        assert main(["parse", "--mode", "strict", "（[甲]，拥有，[乙]）"]) == 0
        captured = capsys.readouterr()
        assert captured.out.strip() == ""
        assert "diagnostic at" in captured.err

    def test_align_ranks_labels(self, capsys):
        assert main(["align", "--relation-set", LABELS, "--k", "3", "拥"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("拥有\t")


class TestLoraDemo:
    def test_default_run_reports_checks(self, capsys):
        assert main(["lora-demo", "--steps", "20"]) == 0
        out = capsys.readouterr().out
        assert "grad-check max relative error" in out
        assert "merge/forward residual" in out
        assert "trainable parameters: 48" in out
        err = float(out.split("grad-check max relative error: ")[1].split()[0])
        assert err <= 1e-5

    def test_zero_steps_still_checks(self, capsys):
        assert main(["lora-demo", "--steps", "0"]) == 0
        out = capsys.readouterr().out
        assert "step     0" in out
        assert "grad-check" in out

    def test_oversized_rank_exits_2(self, capsys):
        assert main(["lora-demo", "--rank", "64", "--d", "8", "--k", "8"]) == 2
