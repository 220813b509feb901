"""Parse generated answer strings into relation triplets, and render them back.

The canonical answer grammar is

    answer  := triplet ( ',' triplet )*
    triplet := '(' '[' head ']' ',' relation ',' '[' tail ']' ')'

with arbitrary whitespace between tokens.  Strict mode accepts exactly
this grammar, all-or-nothing.  Lenient mode additionally normalizes the
full-width punctuation （）［］，、 to ASCII, accepts a missing outer pair
of parentheses around a single triplet, accepts a trailing separator, and
skips text before the first '(' / after the last ')' with a diagnostic.

parse() is total: no input raises, fails to terminate, or reports a
diagnostic position outside [0, len(text)].
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import RelationTriplet

_FULLWIDTH = str.maketrans({"（": "(", "）": ")", "［": "[", "］": "]", "，": ",", "、": ","})

# characters that make a relation label unrepresentable in the grammar
RELATION_FORBIDDEN = frozenset(",[]()")


class RenderError(ValueError):
    """A triplet that cannot round-trip through the answer grammar."""


@dataclass(frozen=True)
class ParseConfig:
    mode: str = "lenient"

    def __post_init__(self) -> None:
        if self.mode not in ("strict", "lenient"):
            raise ValueError(f"mode must be 'strict' or 'lenient', got {self.mode!r}")


STRICT = ParseConfig("strict")
LENIENT = ParseConfig("lenient")


@dataclass(frozen=True)
class ParseOutcome:
    """Parsed triplets plus (codepoint position, message) diagnostics."""

    triplets: tuple[RelationTriplet, ...]
    diagnostics: tuple[tuple[int, str], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def parse(text: str, config: ParseConfig = LENIENT) -> ParseOutcome:
    """Parse an answer string; never raises."""
    lenient = config.mode == "lenient"
    src = text.translate(_FULLWIDTH) if lenient else text
    triplets, diags = _scan(src, lenient)
    if not lenient and diags:
        triplets = []  # strict is all-or-nothing
    return ParseOutcome(tuple(triplets), tuple(diags))


def render(triplets: list[RelationTriplet] | tuple[RelationTriplet, ...]) -> str:
    """Render triplets in canonical form "([h], r, [t])" joined by ", ".

    parse(render(x), STRICT) recovers x.  Raises RenderError for an empty
    list or for fields the grammar cannot carry.
    """
    if not triplets:
        raise RenderError("cannot render an empty triplet list")
    parts = []
    for t in triplets:
        if any(c in RELATION_FORBIDDEN for c in t.relation):
            raise RenderError(
                f"relation {t.relation!r} contains grammar delimiters and cannot round-trip"
            )
        for side, name in ((t.head, "head"), (t.tail, "tail")):
            if "[" in side or "]" in side:
                raise RenderError(f"{name} {side!r} contains brackets and cannot round-trip")
        parts.append(f"([{t.head}], {t.relation}, [{t.tail}])")
    return ", ".join(parts)


def _ws(s: str, i: int) -> int:
    while i < len(s) and s[i].isspace():
        i += 1
    return i


def _bracketed(s: str, i: int, what: str):
    """Parse '[' content ']' at i; returns (text, next_index, error_msg|None)."""
    n = len(s)
    if i >= n or s[i] != "[":
        return None, i, f"expected '[' before {what}"
    close = s.find("]", i + 1)
    if close < 0:
        return None, i, f"unterminated '[' for {what}"
    content = s[i + 1 : close].strip()
    if not content:
        return None, i, f"empty {what}"
    return content, close + 1, None


def _relation_token(s: str, i: int):
    n = len(s)
    j = i
    while j < n and s[j] not in RELATION_FORBIDDEN:
        j += 1
    content = s[i:j].strip()
    if not content:
        return None, i, "empty relation"
    return content, j, None


def _triplet_body(s: str, i: int):
    """Parse '[' h ']' ',' rel ',' '[' t ']' at i (inside the parentheses)."""
    head, j, msg = _bracketed(s, i, "head")
    if msg:
        return None, j, msg
    j = _ws(s, j)
    if j >= len(s) or s[j] != ",":
        return None, j, "expected ',' after head"
    j = _ws(s, j + 1)
    rel, j, msg = _relation_token(s, j)
    if msg:
        return None, j, msg
    if j >= len(s) or s[j] != ",":
        return None, j, "expected ',' after relation"
    j = _ws(s, j + 1)
    tail, j, msg = _bracketed(s, j, "tail")
    if msg:
        return None, j, msg
    triplet = RelationTriplet(head=head, relation=rel, tail=tail, origin="parsed")
    return triplet, j, None


def _triplet_at(s: str, i: int):
    """Parse a full parenthesized triplet at i."""
    if i >= len(s) or s[i] != "(":
        return None, i, "expected '('"
    j = _ws(s, i + 1)
    triplet, j, msg = _triplet_body(s, j)
    if msg:
        return None, j, msg
    j = _ws(s, j)
    if j >= len(s) or s[j] != ")":
        return None, j, "expected ')'"
    return triplet, j + 1, None


def _scan(src: str, lenient: bool):
    n = len(src)
    triplets: list[RelationTriplet] = []
    diags: list[tuple[int, str]] = []

    i = _ws(src, 0)
    if i >= n:
        return [], [(0, "empty answer")]

    if src[i] != "(":
        if not lenient:
            return [], [(i, "expected '('")]
        if src[i] == "[":
            # single triplet without its outer parentheses
            triplet, j, msg = _triplet_body(src, i)
            if msg is None and _ws(src, j) >= n:
                return [triplet], [(i, "missing outer parentheses")]
        nxt = src.find("(", i)
        if nxt < 0:
            return [], [(i, "no triplet found")]
        diags.append((i, "ignored text before first '('"))
        i = nxt

    while i < n:
        triplet, j, msg = _triplet_at(src, i)
        if msg is not None:
            diags.append((j, msg))
            if not lenient:
                break
            nxt = src.find("(", max(j, i + 1))  # resync at the next candidate
            if nxt < 0:
                break
            i = nxt
            continue
        triplets.append(triplet)
        i = _ws(src, j)
        if i >= n:
            break
        if src[i] == ",":
            after = _ws(src, i + 1)
            if after >= n:
                if not lenient:
                    diags.append((i, "trailing separator"))
                break
            i = after
            continue
        if not lenient:
            diags.append((i, "expected ',' between triplets"))
            break
        nxt = src.find("(", i)
        if nxt < 0:
            diags.append((i, "ignored text after last ')'"))
            break
        diags.append((i, "expected ',' between triplets"))
        i = nxt

    return triplets, diags
