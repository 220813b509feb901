"""Prompt assembly and batched inference over an HTTP completion backend.

Three prompting paradigms are supported:

* finetuned — the bare instruction-tuning prompt; the served model is
  expected to know the relation inventory already.
* classify_then_extract — the same prompt plus an "Options:" section
  listing every relation-set label, one per line, in file order.
* generate_then_retrieval — the bare prompt plus a request for a free-form
  relation, whose answer is snapped to the nearest set label afterwards.

Responses are cached on disk keyed by a hash of (prompt, model,
decoding parameters); parsing and alignment always re-run from the cached
raw bodies, so parser upgrades re-score old runs without re-querying.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import requests

from .align import Scorer, align, default_scorer
from .evaluate import PredictionRecord
from .instruct import BuildConfig, build_example
from .model import REInstance, RelationSet, RelationTriplet
from .parsing import LENIENT, parse

log = logging.getLogger(__name__)

PARADIGMS = ("finetuned", "classify_then_extract", "generate_then_retrieval")

_BARE_SPLIT = re.compile(r"[,，、]")


class BackendError(RuntimeError):
    """A request that failed permanently (retries exhausted or 4xx)."""


@dataclass(frozen=True)
class BackendConfig:
    base_url: str
    model_name: str
    temperature: float = 0.0
    max_tokens: int = 256
    timeout: float = 30.0
    max_retries: int = 3
    parallelism: int = 1
    api_key_env: str = "DSCRE_API_KEY"
    raw_completion: bool = False
    backoff_s: float = 0.5

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass(frozen=True)
class PromptSpec:
    paradigm: str
    build_config: BuildConfig = BuildConfig()
    relation_set: RelationSet | None = None
    options_header: str = "Options:"
    retrieval_request: str = "Answer with a single relation word."

    def __post_init__(self) -> None:
        if self.paradigm not in PARADIGMS:
            raise ValueError(f"unknown paradigm {self.paradigm!r}")
        if self.paradigm == "classify_then_extract" and self.relation_set is None:
            raise ValueError("classify_then_extract requires a relation_set")


def build_prompt(instance: REInstance, spec: PromptSpec) -> str:
    """Assemble the full prompt string for one instance."""
    example = build_example(instance, spec.build_config)
    prompt = example.instruction + "\n" + example.input
    if spec.paradigm == "classify_then_extract":
        assert spec.relation_set is not None
        prompt += "\n" + spec.options_header + "\n" + "\n".join(spec.relation_set.labels)
    elif spec.paradigm == "generate_then_retrieval":
        prompt += "\n" + spec.retrieval_request
    return prompt


def cache_key(prompt: str, backend: BackendConfig) -> str:
    """Hash of everything that determines the response."""
    payload = json.dumps(
        {
            "prompt": prompt,
            "model": backend.model_name,
            "temperature": backend.temperature,
            "max_tokens": backend.max_tokens,
        },
        ensure_ascii=False,
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _request_body(prompt: str, backend: BackendConfig) -> dict:
    if backend.raw_completion:
        return {
            "model": backend.model_name,
            "prompt": prompt,
            "temperature": backend.temperature,
            "max_tokens": backend.max_tokens,
        }
    return {
        "model": backend.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": backend.temperature,
        "max_tokens": backend.max_tokens,
    }


def _post_completion(prompt: str, backend: BackendConfig) -> str:
    """POST with retries and exponential backoff; returns the raw body."""
    suffix = "/completions" if backend.raw_completion else "/chat/completions"
    url = backend.base_url.rstrip("/") + suffix
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(backend.api_key_env)
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"

    last_error: Exception | None = None
    for attempt in range(backend.max_retries + 1):
        if attempt:
            time.sleep(backend.backoff_s * 2 ** (attempt - 1))
        try:
            resp = requests.post(
                url,
                json=_request_body(prompt, backend),
                headers=headers,
                timeout=backend.timeout,
            )
        except requests.RequestException as exc:
            last_error = exc
            continue
        if resp.status_code >= 500:
            last_error = BackendError(f"server error {resp.status_code}")
            continue
        if resp.status_code >= 400:
            raise BackendError(f"request rejected: {resp.status_code} {resp.text[:200]}")
        return resp.text
    raise BackendError(f"retries exhausted: {last_error}")


def extract_answer(body: str, raw_completion: bool = False) -> str:
    """Pull the answer text out of a completion response body.

    A body that is not completion-shaped JSON is taken verbatim as the
    answer, which keeps simple stub backends usable.
    """
    try:
        obj = json.loads(body)
        choice = obj["choices"][0]
        return choice["text"] if raw_completion else choice["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError):
        return body


def _bare_relations(raw: str) -> list[str]:
    return [piece.strip() for piece in _BARE_SPLIT.split(raw) if piece.strip()]


def record_from_answer(
    instance: REInstance,
    spec: PromptSpec,
    raw: str,
    scorer: Scorer | None = None,
) -> PredictionRecord:
    """Parse (and for generate_then_retrieval, align) one raw answer."""
    outcome = parse(raw, LENIENT)
    triplets = list(outcome.triplets)
    expect_bare = (
        not spec.build_config.tr or spec.paradigm == "generate_then_retrieval"
    )
    if not triplets and expect_bare:
        # bare-label answers are read as relations for the queried pair
        triplets = [
            RelationTriplet(
                instance.head.surface, relation, instance.tail.surface, origin="parsed"
            )
            for relation in _bare_relations(raw)
        ]

    aligned: tuple[tuple[str, bool], ...] = ()
    if spec.paradigm == "generate_then_retrieval" and triplets:
        if spec.relation_set is None:
            raise ValueError("generate_then_retrieval needs a relation_set to align")
        scorer = scorer or default_scorer()
        results = [align(t.relation, spec.relation_set, scorer) for t in triplets]
        aligned = tuple((r.best, r.exact) for r in results)

    return PredictionRecord(
        instance_id=instance.id,
        raw_answer=raw,
        parsed=tuple(triplets),
        aligned_relations=aligned,
    )


def run_batch(
    instances: list[REInstance],
    spec: PromptSpec,
    backend: BackendConfig,
    cache_dir: str | Path,
    scorer: Scorer | None = None,
) -> list[PredictionRecord]:
    """Answer every instance, in input order, through the response cache.

    Each raw response is written to the cache as soon as it arrives, so an
    interrupted run resumes without repeating network calls.  Instances
    whose requests fail after all retries are recorded with an empty
    answer and the run continues.
    """
    cache = Path(cache_dir)
    cache.mkdir(parents=True, exist_ok=True)
    probe = cache / ".write-probe"
    try:
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"cache directory {cache} is not writable: {exc}") from exc

    def fetch(instance: REInstance) -> PredictionRecord:
        prompt = build_prompt(instance, spec)
        key = cache_key(prompt, backend)
        entry = cache / key
        if entry.exists():
            body = entry.read_text(encoding="utf-8")
        else:
            try:
                body = _post_completion(prompt, backend)
            except BackendError as exc:
                log.warning("instance %s failed: %s", instance.id, exc)
                return PredictionRecord(instance_id=instance.id, raw_answer="")
            # unique tmp per writer; os.replace makes the publish atomic
            tmp = entry.with_name(f"{entry.name}.{threading.get_ident()}.tmp")
            tmp.write_text(body, encoding="utf-8")
            os.replace(tmp, entry)
        raw = extract_answer(body, backend.raw_completion)
        return record_from_answer(instance, spec, raw, scorer)

    if backend.parallelism == 1:
        return [fetch(instance) for instance in instances]
    with ThreadPoolExecutor(max_workers=backend.parallelism) as pool:
        return list(pool.map(fetch, instances))
