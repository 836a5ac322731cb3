from .metrics import (
    CSV_COLUMNS,
    Judge,
    JudgedRef,
    LabeledRun,
    Method,
    compute_metrics,
    dump_runs,
    load_runs,
    precision_pct,
    usability_pct,
    validity_pct,
)
from .compare import QueryRow, compare_queries
from .corpus import data_path, load_corpus
from .report import judged_summary, render_bars, summary_json, summary_table

__all__ = [
    "CSV_COLUMNS",
    "Judge",
    "JudgedRef",
    "LabeledRun",
    "Method",
    "compute_metrics",
    "dump_runs",
    "load_runs",
    "precision_pct",
    "usability_pct",
    "validity_pct",
    "QueryRow",
    "compare_queries",
    "data_path",
    "load_corpus",
    "judged_summary",
    "render_bars",
    "summary_json",
    "summary_table",
]
