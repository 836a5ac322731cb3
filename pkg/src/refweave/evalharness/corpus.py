"""Access to the data files bundled with the harness."""

from __future__ import annotations

import csv
from pathlib import Path

DATA_DIR = Path(__file__).parent / "data"


def data_path(name: str) -> Path:
    path = DATA_DIR / name
    if not path.exists():
        raise FileNotFoundError(f"no bundled data file {name!r}")
    return path


def load_corpus(path: Path | str | None = None) -> list[tuple[str, str]]:
    """(sentence_id, sentence) pairs; the bundled ten-sentence set by default."""
    path = Path(path) if path is not None else data_path("corpus.csv")
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        return [(row["sentence_id"], row["sentence"]) for row in reader]
