"""Rendering of metric summaries: aligned text, JSON, and a bar chart."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from ..errors import NoJudgments
from .metrics import Judge, LabeledRun, precision_pct, usability_pct, validity_pct


def judged_summary(name: str, runs: Sequence[LabeledRun]) -> dict:
    """One method's row: validity plus per-judge precision and usability."""
    row: dict = {
        "method": name,
        "validity_pct": validity_pct(runs),
        "precision_pct": {},
        "usability_pct": {},
    }
    for judge in Judge:
        subset = [run for run in runs if run.judge is judge]
        if not subset:
            continue
        try:
            row["precision_pct"][judge.value] = precision_pct(subset)
        except NoJudgments:
            row["precision_pct"][judge.value] = None
        row["usability_pct"][judge.value] = usability_pct(subset)
    return row


def _cell(value) -> str:
    return "-" if value is None else f"{value:.1f}"


def summary_table(rows: Sequence[dict]) -> str:
    judges = [judge.value for judge in Judge]
    header = ["method", "validity"]
    header += [f"precision/{j}" for j in judges] + [f"usability/{j}" for j in judges]
    table = [header]
    for row in rows:
        cells = [row["method"], _cell(row["validity_pct"])]
        cells += [_cell(row["precision_pct"].get(j)) for j in judges]
        cells += [_cell(row["usability_pct"].get(j)) for j in judges]
        table.append(cells)
    widths = [max(len(line[col]) for line in table) for col in range(len(header))]
    rendered = []
    for line in table:
        rendered.append("  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip())
    return "\n".join(rendered)


def summary_json(rows: Sequence[dict]) -> str:
    return json.dumps({"methods": list(rows)}, indent=2, sort_keys=True)


def render_bars(rows: Sequence[dict], out_path: Path | str) -> Path:
    """Grouped bar chart of every metric column, one bar group per metric."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    judges = [judge.value for judge in Judge]
    columns = ["validity"]
    columns += [f"precision/{j}" for j in judges] + [f"usability/{j}" for j in judges]

    def values(row: dict) -> list[float]:
        out = [row["validity_pct"]]
        out += [row["precision_pct"].get(j) or 0.0 for j in judges]
        out += [row["usability_pct"].get(j) or 0.0 for j in judges]
        return out

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(9, 4.5))
    group_width = 0.8
    bar_width = group_width / max(len(rows), 1)
    for position, row in enumerate(rows):
        offsets = [
            i - group_width / 2 + bar_width * (position + 0.5) for i in range(len(columns))
        ]
        ax.bar(offsets, values(row), width=bar_width, label=row["method"])
    ax.set_xticks(range(len(columns)))
    ax.set_xticklabels(columns, rotation=20, ha="right")
    ax.set_ylabel("percent")
    ax.set_ylim(0, 105)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path
