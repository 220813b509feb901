"""Domain-specific Chinese relation extraction toolkit.

Pipeline pieces, usable independently or chained: dataset ingestion,
instruction-example construction, generated-answer parsing, relation-set
alignment, evaluation with an error taxonomy, a batched inference client,
and a small float64 reference for low-rank adapter / attention /
autoregressive-scoring arithmetic.
"""

__version__ = "0.1.0"

from .align import AlignmentResult, Scorer, align, default_scorer, validate
from .client import (
    BackendConfig,
    PromptSpec,
    build_prompt,
    record_from_answer,
    run_batch,
)
from .evaluate import (
    EvalReport,
    PredictionRecord,
    aggregate,
    classify_error,
    compare_runs,
    read_run,
    score_instance,
    write_comparison,
    write_report,
    write_run,
)
from .ingest import DatasetManifest, load_split, sample_fraction, write_canonical
from .instruct import (
    BuildConfig,
    InstructionExample,
    build_dataset,
    build_example,
    mark_entities,
    read_dataset,
    write_dataset,
)
from .model import (
    Entity,
    REInstance,
    RelationSet,
    RelationTriplet,
    Sentence,
    find_occurrences,
)
from .parsing import LENIENT, STRICT, ParseConfig, ParseOutcome, parse, render

from .lora import (
    LoraAdapter,
    ToyDecoder,
    attention,
    grad_check,
    init_adapter,
    load_adapter,
    lora_forward,
    make_decoder,
    merge,
    save_adapter,
    sequence_log_prob,
    softmax,
    train_step,
)

__all__ = [
    "__version__",
    "AlignmentResult",
    "BackendConfig",
    "BuildConfig",
    "DatasetManifest",
    "Entity",
    "EvalReport",
    "InstructionExample",
    "LENIENT",
    "LoraAdapter",
    "ParseConfig",
    "ParseOutcome",
    "PredictionRecord",
    "PromptSpec",
    "REInstance",
    "RelationSet",
    "RelationTriplet",
    "STRICT",
    "Scorer",
    "Sentence",
    "ToyDecoder",
    "aggregate",
    "align",
    "attention",
    "build_dataset",
    "build_example",
    "build_prompt",
    "classify_error",
    "compare_runs",
    "default_scorer",
    "find_occurrences",
    "grad_check",
    "init_adapter",
    "load_adapter",
    "load_split",
    "lora_forward",
    "make_decoder",
    "mark_entities",
    "merge",
    "parse",
    "read_dataset",
    "read_run",
    "record_from_answer",
    "render",
    "run_batch",
    "sample_fraction",
    "save_adapter",
    "score_instance",
    "sequence_log_prob",
    "softmax",
    "train_step",
    "validate",
    "write_canonical",
    "write_comparison",
    "write_dataset",
    "write_report",
    "write_run",
]
