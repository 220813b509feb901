"""Single executable for the pipeline: build, sample, infer, eval, parse,
align, and a lora-demo subcommand.

Machine-readable outputs go to files; human-readable tables and progress
go to standard output / standard error.  Exit codes: 0 success, 2 usage or
validation failure, 3 environment/backend failure.  Flags override values
from an optional ``key = value`` config file, and every run prints the
hash of its resolved configuration so runs can be told apart later.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .align import align as align_relation
from .align import default_scorer
from .client import BackendConfig, BackendError, PromptSpec, run_batch
from .evaluate import aggregate, read_run, write_report, write_run
from .ingest import DatasetManifest, load_split, sample_fraction
from .instruct import BuildConfig, build_dataset, write_dataset
from .lora import grad_check, lora_forward, make_decoder, merge, train_step
from .model import RelationSet
from .parsing import LENIENT, STRICT, parse as parse_answer

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ENV = 3

ERROR_DISPLAY = {
    "understanding": "Understanding",
    "multi_relation": "Multiple Relations",
    "na": "NA",
    "nonexistent": "Nonexistent",
}


def _read_config_file(path: str | None) -> dict[str, str]:
    """Parse a plain ``key = value`` config file; '#' starts a comment."""
    if not path:
        return {}
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line is not 'key = value': {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _coerce(value: str, like) -> object:
    if isinstance(like, bool):
        return _BOOL[value.lower()]
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < explicit flags; prints the resolved hash."""
    file_values = _read_config_file(getattr(args, "config", None))
    resolved = dict(defaults)
    for key, value in file_values.items():
        if key in defaults:
            resolved[key] = _coerce(value, defaults[key])
    for key in defaults:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            resolved[key] = flag_value
    digest = hashlib.sha256(
        "\n".join(f"{k}={resolved[k]}" for k in sorted(resolved)).encode("utf-8")
    ).hexdigest()
    print(f"config-hash {digest[:12]}", file=sys.stderr)
    return resolved


def _build_config(opts: dict) -> BuildConfig:
    return BuildConfig(
        instruction_text=opts["instruction"],
        em=opts["em"],
        at=opts["at"],
        tr=opts["tr"],
    )


# -- subcommands --


def cmd_build(args: argparse.Namespace) -> int:
    opts = _resolve(
        args,
        {
            "dataset": "",
            "split": "train",
            "em": True,
            "at": True,
            "tr": True,
            "instruction": BuildConfig().instruction_text,
            "out": "",
        },
    )
    if not opts["dataset"] or not opts["out"]:
        print("build: --dataset and --out are required", file=sys.stderr)
        return EXIT_USAGE
    manifest = DatasetManifest.load(opts["dataset"])
    instances = load_split(manifest, opts["split"])
    examples = build_dataset(instances, _build_config(opts))
    write_dataset(examples, opts["out"])
    print(f"wrote {len(examples)} examples to {opts['out']}")
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    opts = _resolve(
        args, {"infile": "", "fraction": 1.0, "seed": 0, "out": ""}
    )
    if not opts["infile"] or not opts["out"]:
        print("sample: --in and --out are required", file=sys.stderr)
        return EXIT_USAGE
    # sample whole records so the output stays a valid canonical file
    lines = [
        line
        for line in Path(opts["infile"]).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    chosen = sample_fraction(lines, opts["fraction"], opts["seed"])
    Path(opts["out"]).write_text(
        "".join(line + "\n" for line in chosen), encoding="utf-8", newline="\n"
    )
    print(f"sampled {len(chosen)} of {len(lines)} records to {opts['out']}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    opts = _resolve(
        args,
        {
            "gold": "",
            "run": "",
            "relation_set": "",
            "exclude_na": False,
            "report": "",
        },
    )
    for required in ("gold", "run", "relation_set"):
        if not opts[required]:
            print(f"eval: --{required.replace('_', '-')} is required", file=sys.stderr)
            return EXIT_USAGE
    relation_set = RelationSet.from_file(opts["relation_set"])
    manifest = DatasetManifest(
        name="gold",
        splits={"test": Path(opts["gold"])},
        relation_set_path=Path(opts["relation_set"]),
    )
    gold = load_split(manifest, "test")
    by_id = {inst.id: inst for inst in gold}
    records = read_run(opts["run"])
    try:
        pairs = [(by_id[r.instance_id], r) for r in records]
    except KeyError as exc:
        print(f"eval: run references unknown instance id {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = aggregate(pairs, relation_set, exclude_na=opts["exclude_na"])
    print(
        f"P {report.precision * 100:.2f} R {report.recall * 100:.2f} "
        f"F1 {report.f1 * 100:.2f}"
    )
    if report.n_errors:
        for category, count in report.error_taxonomy.items():
            pct = 100.0 * count / report.n_errors
            print(f"{ERROR_DISPLAY[category]}: {pct:.2f}%")
    if opts["report"]:
        write_report(report, opts["report"])
        print(f"report written to {opts['report']}")
    return EXIT_OK


def cmd_infer(args: argparse.Namespace) -> int:
    opts = _resolve(
        args,
        {
            "dataset": "",
            "split": "test",
            "paradigm": "finetuned",
            "backend_url": "",
            "model": "",
            "cache": "",
            "out": "",
            "em": True,
            "at": True,
            "tr": True,
            "instruction": BuildConfig().instruction_text,
            "parallelism": 1,
            "max_tokens": 256,
            "temperature": 0.0,
            "timeout": 30.0,
            "retries": 3,
            "api_key_env": "DSCRE_API_KEY",
        },
    )
    for required in ("dataset", "backend_url", "model", "cache", "out"):
        if not opts[required]:
            print(f"infer: --{required.replace('_', '-')} is required", file=sys.stderr)
            return EXIT_USAGE
    manifest = DatasetManifest.load(opts["dataset"])
    instances = load_split(manifest, opts["split"])
    relation_set = manifest.relation_set()
    try:
        spec = PromptSpec(
            paradigm=opts["paradigm"],
            build_config=_build_config(opts),
            relation_set=relation_set,
        )
    except ValueError as exc:
        print(f"infer: {exc}", file=sys.stderr)
        return EXIT_USAGE
    backend = BackendConfig(
        base_url=opts["backend_url"],
        model_name=opts["model"],
        temperature=opts["temperature"],
        max_tokens=opts["max_tokens"],
        timeout=opts["timeout"],
        max_retries=opts["retries"],
        parallelism=opts["parallelism"],
        api_key_env=opts["api_key_env"],
    )
    records = run_batch(instances, spec, backend, opts["cache"])
    failed = sum(1 for r in records if not r.raw_answer)
    if records and failed == len(records):
        print("infer: backend unreachable and cache cold", file=sys.stderr)
        return EXIT_ENV
    write_run(records, opts["out"])
    print(f"wrote {len(records)} records to {opts['out']} ({failed} failed)")
    return EXIT_OK


def cmd_parse(args: argparse.Namespace) -> int:
    opts = _resolve(args, {"mode": "lenient", "text": ""})
    text = opts["text"] if opts["text"] else sys.stdin.read()
    config = STRICT if opts["mode"] == "strict" else LENIENT
    outcome = parse_answer(text, config)
    for triplet in outcome.triplets:
        print(
            json.dumps(
                {"head": triplet.head, "relation": triplet.relation, "tail": triplet.tail},
                ensure_ascii=False,
            )
        )
    for position, message in outcome.diagnostics:
        print(f"diagnostic at {position}: {message}", file=sys.stderr)
    return EXIT_OK


def cmd_align(args: argparse.Namespace) -> int:
    opts = _resolve(args, {"relation_set": "", "k": 1, "query": ""})
    if not opts["relation_set"]:
        print("align: --relation-set is required", file=sys.stderr)
        return EXIT_USAGE
    relation_set = RelationSet.from_file(opts["relation_set"])
    result = align_relation(
        opts["query"], relation_set, default_scorer(), k=opts["k"]
    )
    for label, score in result.ranked:
        mark = " (exact)" if result.exact and label == result.best else ""
        print(f"{label}\t{score:.4f}{mark}")
    return EXIT_OK


def cmd_lora_demo(args: argparse.Namespace) -> int:
    opts = _resolve(
        args, {"seed": 0, "steps": 200, "d": 4, "k": 8, "rank": 2}
    )
    d, k, rank = opts["d"], opts["k"], opts["rank"]
    if rank >= min(d, k):
        print(
            f"lora-demo: rank {rank} must be strictly below min(d, k) = {min(d, k)}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    vocab = ["a", "b", "c"]
    model = make_decoder(vocab, k=k, d_k=d, rank=rank, seed=opts["seed"])
    batch = [([s], [], [s, s]) for s in vocab]

    loss = train_step(model, batch, lr=0.0)
    print(f"step     0  loss {loss:.6f}")
    for step in range(1, opts["steps"] + 1):
        loss = train_step(model, batch, lr=1.0)
        if step % max(1, opts["steps"] // 10) == 0 or step == 1:
            print(f"step {step:>5}  loss {loss:.6f}")

    err = grad_check(model, batch[0], epsilon=1e-5)
    print(f"grad-check max relative error: {err:.3e}")

    rng = np.random.default_rng(opts["seed"])
    w0 = rng.normal(size=(d, k))
    x = rng.normal(size=k)
    residual = float(
        np.max(np.abs(merge(w0, model.lora_q) @ x - lora_forward(w0, model.lora_q, x)))
    )
    print(f"merge/forward residual: {residual:.3e}")
    print(f"trainable parameters: {model.trainable_parameter_count}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dscre",
        description="Domain-specific Chinese relation extraction toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"dscre {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    boolopt = argparse.BooleanOptionalAction

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("build", help="build an instruction dataset from a split")
    common(p)
    p.add_argument("--dataset", help="dataset manifest JSON")
    p.add_argument("--split", default=None)
    p.add_argument("--em", action=boolopt, default=None, help="entity markers")
    p.add_argument("--at", action=boolopt, default=None, help="appended query triplet")
    p.add_argument("--tr", action=boolopt, default=None, help="triplet-form outputs")
    p.add_argument("--instruction", default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("sample", help="sample a fraction of a canonical JSONL file")
    common(p)
    p.add_argument("--in", dest="infile")
    p.add_argument("--fraction", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("infer", help="run a prompting paradigm against a backend")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--split", default=None)
    p.add_argument("--paradigm", choices=("finetuned", "classify_then_extract", "generate_then_retrieval"), default=None)
    p.add_argument("--backend-url", dest="backend_url")
    p.add_argument("--model")
    p.add_argument("--cache")
    p.add_argument("--out")
    p.add_argument("--em", action=boolopt, default=None)
    p.add_argument("--at", action=boolopt, default=None)
    p.add_argument("--tr", action=boolopt, default=None)
    p.add_argument("--instruction", default=None)
    p.add_argument("--parallelism", type=int, default=None)
    p.add_argument("--max-tokens", dest="max_tokens", type=int, default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--retries", type=int, default=None)
    p.add_argument("--api-key-env", dest="api_key_env", default=None,
                   help="environment variable holding the bearer token")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="score a run file against gold")
    common(p)
    p.add_argument("--gold", help="canonical JSONL gold file")
    p.add_argument("--run", help="run file from infer")
    p.add_argument("--relation-set", dest="relation_set")
    p.add_argument("--exclude-na", dest="exclude_na", action=boolopt, default=None)
    p.add_argument("--report", default=None, help="write machine-readable report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("parse", help="parse a generated answer string")
    common(p)
    p.add_argument("--mode", choices=("strict", "lenient"), default=None)
    p.add_argument("text", nargs="?", default=None, help="answer text (stdin if omitted)")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("align", help="align a relation string to the nearest label")
    common(p)
    p.add_argument("--relation-set", dest="relation_set")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("query")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("lora-demo", help="train and check the toy low-rank decoder")
    common(p)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--rank", type=int, default=None)
    p.set_defaults(func=cmd_lora_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BackendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENV
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
