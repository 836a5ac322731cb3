"""Rule-based sentence segmentation of a selected span.

Deliberately not an LLM call: splitting must be deterministic and must never
ship manuscript text anywhere. A split happens at '.', '?' or '!' followed by
a single space and an uppercase letter, except inside $...$ math and after a
protected abbreviation.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import EmptySelection
from .latex import Selection, normalize_ws

# Extensible via the `abbreviations` argument. "etc." and "no." are left out
# on purpose: both commonly end real sentences.
DEFAULT_ABBREVIATIONS: tuple[str, ...] = (
    "e.g.",
    "i.e.",
    "et al.",
    "fig.",
    "eq.",
    "dr.",
    "prof.",
    "tab.",
    "sec.",
    "ref.",
    "vs.",
    "cf.",
    "resp.",
    "approx.",
)

_TERMINALS = ".?!"


@dataclass(frozen=True)
class Claim:
    sentence: str
    index_in_selection: int


def _ends_with_abbreviation(text: str, dot_idx: int, abbreviations: tuple[str, ...]) -> bool:
    head = text[: dot_idx + 1].lower()
    for abbr in abbreviations:
        if not head.endswith(abbr):
            continue
        boundary = len(head) - len(abbr)
        if boundary == 0 or not head[boundary - 1].isalnum():
            return True
    return False


def segment_sentences(
    selection: Selection,
    abbreviations: tuple[str, ...] = DEFAULT_ABBREVIATIONS,
) -> list[Claim]:
    """Split the selection into sentence-level claims with 0-based ordinals."""
    text = normalize_ws(selection.text)
    if not text:
        raise EmptySelection("selection is empty after whitespace normalization")

    abbreviations = tuple(a.lower() for a in abbreviations)
    split_after: list[int] = []  # index of the char right after the terminal
    in_math = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            i += 2
            continue
        if ch == "$":
            in_math = not in_math
            i += 1
            continue
        if ch in _TERMINALS and not in_math:
            nxt = i + 1
            if (
                nxt + 1 < n
                and text[nxt] == " "
                and text[nxt + 1].isalpha()
                and text[nxt + 1].isupper()
                and not (ch == "." and _ends_with_abbreviation(text, i, abbreviations))
            ):
                split_after.append(nxt)
        i += 1

    claims: list[Claim] = []
    start = 0
    for pos in split_after:
        claims.append(Claim(text[start:pos], len(claims)))
        start = pos + 1  # skip the single separating space
    claims.append(Claim(text[start:], len(claims)))
    return claims
