"""Benchmark harnesses and the study-style metrics report."""

from .comprehension import eval_comprehension
from .generation_eval import eval_generation
from .placement_eval import eval_placement
from .plots import plot_curves, plot_relation_bars, write_curves_csv
from .report import COLUMNS, TaskMetrics, format_table, table2_report

__all__ = [
    "eval_comprehension",
    "eval_generation",
    "eval_placement",
    "TaskMetrics",
    "table2_report",
    "format_table",
    "COLUMNS",
    "write_curves_csv",
    "plot_curves",
    "plot_relation_bars",
]
