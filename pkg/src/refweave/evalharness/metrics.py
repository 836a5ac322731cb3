"""Metric arithmetic over labeled discovery runs.

A run is one sentence handled by one method and judged by one judge; its
references carry a validity flag and, for valid references only, an
optional relevance judgment. Three percentages summarize a batch of runs:

  validity   valid references / all references
  precision  relevant references / judged references
  usability  runs with at least one valid and relevant reference / runs

All three are reported to one decimal. Precision is defined over the
judged subset so that methods which fabricate references are scored on
what survives the validity check, not padded by it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from ..errors import InvalidJudgment, NoJudgments


class Method(str, Enum):
    SYSTEM = "system"
    KEYWORD_SEARCH = "keyword_search"
    GENERATIVE = "generative"


class Judge(str, Enum):
    HUMAN_FILE = "human"
    LLM = "llm"


@dataclass(frozen=True)
class JudgedRef:
    ref_id: str
    valid: bool
    # None means unjudged. Only valid references may carry a judgment.
    relevant: bool | None = None

    def __post_init__(self):
        if self.relevant is not None and not self.valid:
            raise InvalidJudgment(f"{self.ref_id}: judged but not valid")


@dataclass(frozen=True)
class LabeledRun:
    sentence_id: str
    method: Method
    references: tuple[JudgedRef, ...]
    judge: Judge


def _checked(runs: Iterable[LabeledRun]) -> list[LabeledRun]:
    checked = list(runs)
    if not checked:
        raise ValueError("need at least one run")
    return checked


def _refs(runs: Sequence[LabeledRun]) -> list[JudgedRef]:
    collected = [ref for run in runs for ref in run.references]
    if not collected:
        raise ValueError("runs carry no references")
    return collected


def _pct(numerator: int, denominator: int) -> float:
    return round(100.0 * numerator / denominator, 1)


def validity_pct(runs: Iterable[LabeledRun]) -> float:
    refs = _refs(_checked(runs))
    return _pct(sum(1 for ref in refs if ref.valid), len(refs))


def precision_pct(runs: Iterable[LabeledRun]) -> float:
    refs = _refs(_checked(runs))
    judged = [ref for ref in refs if ref.relevant is not None]
    if not judged:
        raise NoJudgments("no reference carries a relevance judgment")
    return _pct(sum(1 for ref in judged if ref.relevant), len(judged))


def usability_pct(runs: Iterable[LabeledRun]) -> float:
    checked = _checked(runs)
    usable = sum(
        1
        for run in checked
        if any(ref.valid and ref.relevant for ref in run.references)
    )
    return _pct(usable, len(checked))


def compute_metrics(runs: Iterable[LabeledRun]) -> dict[str, float]:
    checked = _checked(runs)
    return {
        "validity_pct": validity_pct(checked),
        "precision_pct": precision_pct(checked),
        "usability_pct": usability_pct(checked),
    }


# -- CSV judgment files --------------------------------------------------------

CSV_COLUMNS = ("sentence_id", "ref_id", "valid", "relevant", "judge")

_BOOLEANS = {"true": True, "false": False}


def _parse_bool(raw: str, column: str, where: str) -> bool:
    try:
        return _BOOLEANS[raw.strip().lower()]
    except KeyError:
        raise ValueError(f"{where}: {column} must be true or false, got {raw!r}") from None


def load_runs(path: Path | str, method: Method = Method.SYSTEM) -> list[LabeledRun]:
    """Reads a judgment CSV into runs grouped by (sentence, judge), file order."""
    path = Path(path)
    grouped: dict[tuple[str, Judge], list[JudgedRef]] = {}
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for line, row in enumerate(reader, start=2):
            where = f"{path}:{line}"
            try:
                judge = Judge(row["judge"].strip().lower())
            except ValueError:
                raise ValueError(f"{where}: unknown judge {row['judge']!r}") from None
            raw_relevant = (row["relevant"] or "").strip()
            ref = JudgedRef(
                ref_id=row["ref_id"].strip(),
                valid=_parse_bool(row["valid"], "valid", where),
                relevant=None if not raw_relevant else _parse_bool(raw_relevant, "relevant", where),
            )
            grouped.setdefault((row["sentence_id"].strip(), judge), []).append(ref)
    return [
        LabeledRun(sentence_id=sentence_id, method=method, references=tuple(refs), judge=judge)
        for (sentence_id, judge), refs in grouped.items()
    ]


def dump_runs(runs: Iterable[LabeledRun], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for run in runs:
            for ref in run.references:
                relevant = "" if ref.relevant is None else str(ref.relevant).lower()
                writer.writerow(
                    [run.sentence_id, ref.ref_id, str(ref.valid).lower(), relevant, run.judge.value]
                )
