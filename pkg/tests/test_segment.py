"""Sentence segmentation against the hand-labeled oracle file."""

import json
import random
import string
from pathlib import Path

import pytest

from refweave.errors import EmptySelection
from refweave.manuscript import Selection, normalize_ws, segment_sentences

ORACLE_PATH = Path(__file__).parent / "data" / "sentence_oracle.json"
ORACLE_CASES = json.loads(ORACLE_PATH.read_text(encoding="utf-8"))


def sel(text: str) -> Selection:
    return Selection(0, len(text), text, text)


@pytest.mark.parametrize(
    "case", ORACLE_CASES, ids=[c["text"][:40] for c in ORACLE_CASES]
)
def test_oracle_case(case):
    claims = segment_sentences(sel(case["text"]))
    assert [c.sentence for c in claims] == case["sentences"]


def test_ordinals_are_dense_zero_based():
    claims = segment_sentences(sel("One. Two. Three."))
    assert [c.index_in_selection for c in claims] == [0, 1, 2]


def test_empty_selection_rejected():
    with pytest.raises(EmptySelection):
        segment_sentences(sel("   \t  \n "))


def test_custom_abbreviations_extend_protection():
    text = "See Thm. Two for details."
    assert len(segment_sentences(sel(text))) == 2
    assert len(segment_sentences(sel(text), abbreviations=("thm.",))) == 1


def _random_paragraph(rng: random.Random) -> str:
    words = []
    for _ in range(rng.randint(1, 40)):
        n = rng.randint(1, 10)
        word = "".join(rng.choice(string.ascii_letters + string.digits + ".?!$,;-") for _ in range(n))
        words.append(word)
    return " ".join(words)


def test_concatenation_reconstructs_normalized_text():
    # Joining the claims with single spaces must reproduce the normalized span.
    rng = random.Random(1234)
    for _ in range(1000):
        text = _random_paragraph(rng)
        if not normalize_ws(text):
            continue
        claims = segment_sentences(sel(text))
        assert " ".join(c.sentence for c in claims) == normalize_ws(text)


def test_determinism():
    text = "First claim. Second claim? Third!"
    runs = [tuple(c.sentence for c in segment_sentences(sel(text))) for _ in range(5)]
    assert len(set(runs)) == 1
