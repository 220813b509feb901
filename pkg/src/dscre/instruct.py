"""Build instruction-tuning examples and inference inputs from REInstances.

Three independently switchable parts make up an example:

* entity markers (``em``): every occurrence of the head and tail surface in
  the sentence is wrapped in "[" "]",
* an appended query triplet (``at``): the input ends with "([h], ?, [t])",
* triplet results (``tr``): the expected output is rendered as full
  triplets rather than bare relation labels.

All three default to on.  Output triplets always use the canonical
renderer so the answer parser recovers them exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .model import Entity, REInstance, RelationTriplet, Sentence, find_occurrences
from .parsing import render

DEFAULT_INSTRUCTION = "Please extract the relation based on the given sentence and entities."


class EntityNotFoundError(ValueError):
    """An entity with neither a span nor an occurrence in the sentence."""


class BuildError(ValueError):
    """An instance that could not be built; carries the instance id."""

    def __init__(self, instance_id: str, reason: str):
        self.instance_id = instance_id
        super().__init__(f"instance {instance_id!r}: {reason}")


@dataclass(frozen=True)
class BuildConfig:
    instruction_text: str = DEFAULT_INSTRUCTION
    em: bool = True
    at: bool = True
    tr: bool = True
    multi_separator: str = ", "

    def __post_init__(self) -> None:
        if not self.instruction_text:
            raise ValueError("instruction_text must be non-empty")


@dataclass(frozen=True)
class InstructionExample:
    instruction: str
    input: str
    output: str
    source_id: str


def mark_entities(sentence: Sentence, head: Entity, tail: Entity) -> str:
    """Wrap every occurrence of each entity surface in "[" "]".

    Longer surfaces claim their spans first; occurrences of the shorter
    surface that overlap an already-claimed span are left unmarked, so
    markers never nest or interleave.  Equal head/tail surfaces are marked
    once per occurrence.
    """
    surfaces: list[tuple[str, Entity]] = [(head.surface, head)]
    if tail.surface != head.surface:
        surfaces.append((tail.surface, tail))
    surfaces.sort(key=lambda pair: -len(pair[0]))

    claimed: list[tuple[int, int]] = []
    for surface, entity in surfaces:
        spans = find_occurrences(sentence, surface)
        if not spans and entity.span is not None:
            spans = [entity.span]
        if not spans:
            raise EntityNotFoundError(
                f"entity {surface!r} not found in sentence {sentence.text!r}"
            )
        for start, end in spans:
            if any(start < c_end and c_start < end for c_start, c_end in claimed):
                continue
            claimed.append((start, end))

    claimed.sort()
    out: list[str] = []
    pos = 0
    for start, end in claimed:
        out.append(sentence.text[pos:start])
        out.append("[")
        out.append(sentence.text[start:end])
        out.append("]")
        pos = end
    out.append(sentence.text[pos:])
    return "".join(out)


def _query_triplet(head: Entity, tail: Entity, em: bool) -> str:
    if em:
        return f"([{head.surface}], ?, [{tail.surface}])"
    return f"({head.surface}, ?, {tail.surface})"


def build_example(instance: REInstance, config: BuildConfig = BuildConfig()) -> InstructionExample:
    """Build one (instruction, input, output) example from an instance."""
    if config.em:
        input_text = mark_entities(instance.sentence, instance.head, instance.tail)
    else:
        input_text = instance.sentence.text
    if config.at:
        input_text += "\n" + _query_triplet(instance.head, instance.tail, config.em)

    if config.tr:
        triplets = [
            RelationTriplet(instance.head.surface, rel, instance.tail.surface, origin="gold")
            for rel in instance.gold_relations
        ]
        output = config.multi_separator.join(render([t]) for t in triplets)
    else:
        output = ",".join(instance.gold_relations)

    return InstructionExample(
        instruction=config.instruction_text,
        input=input_text,
        output=output,
        source_id=instance.id,
    )


def build_dataset(
    instances: list[REInstance], config: BuildConfig = BuildConfig()
) -> list[InstructionExample]:
    """Order-preserving map of build_example; fails fast naming the instance."""
    examples = []
    for instance in instances:
        try:
            examples.append(build_example(instance, config))
        except ValueError as exc:
            raise BuildError(instance.id, str(exc)) from exc
    return examples


def write_dataset(examples: list[InstructionExample], path: str | Path) -> None:
    """Write the instruction dataset interchange file.

    The file is a UTF-8 JSON array of {instruction, input, output} records,
    one record per line so consumers can report positions by line number.
    """
    lines = [
        json.dumps(
            {"instruction": e.instruction, "input": e.input, "output": e.output},
            ensure_ascii=False,
        )
        for e in examples
    ]
    body = "[\n" + ",\n".join(lines) + "\n]\n" if lines else "[]\n"
    Path(path).write_text(body, encoding="utf-8", newline="\n")


def read_dataset(path: str | Path) -> list[dict]:
    """Read an instruction dataset interchange file back into records."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValueError(f"{path}: expected a JSON array of records")
    return data
