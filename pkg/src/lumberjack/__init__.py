"""Deforestation for a small call-by-value functional language.

The pipeline rewrites producer/consumer pairs so that intermediate
structures are never allocated, and ships with a counting interpreter
for checking that rewritten programs still compute the same results.
"""

from .interp import Counters, Outcome, diff_outcomes, run_main
from .parser import ParseError, check_program, parse_expr, parse_program
from .pipeline import OptimizeResult, optimize_program, optimize_source
from .printer import render_program, render_term

__all__ = [
    "Counters",
    "Outcome",
    "OptimizeResult",
    "ParseError",
    "check_program",
    "diff_outcomes",
    "optimize_program",
    "optimize_source",
    "parse_expr",
    "parse_program",
    "render_program",
    "render_term",
    "run_main",
]
