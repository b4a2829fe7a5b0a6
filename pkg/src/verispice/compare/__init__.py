"""Answer-expression grammar and simulation-vs-answer comparison."""

from .expr import (
    MAX_DEGREE,
    RationalNetworkFunction,
    Term,
    TermKind,
    TermSum,
    evaluate,
    format_expression,
    parse_expression,
)
from .verdict import ComparisonReport, TolerancePolicy, align, compare, tail_window

__all__ = [
    "MAX_DEGREE",
    "ComparisonReport",
    "RationalNetworkFunction",
    "Term",
    "TermKind",
    "TermSum",
    "TolerancePolicy",
    "align",
    "compare",
    "evaluate",
    "format_expression",
    "parse_expression",
    "tail_window",
]
