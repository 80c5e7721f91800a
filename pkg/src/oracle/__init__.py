"""Brute-force bilevel oracle for small planning instances."""

from .brute_force import (
    OracleResult,
    PlanEvaluation,
    brute_force,
    evaluate_plan,
    export_table,
    is_degenerate,
    oracle_table,
    select_best,
)
from .enumeration import check_plan_budget, count_plans, enumerate_plans
from .exceptions import EnumerationBudgetError, OracleError, OracleSolveError

__version__ = "1.0.0"
__all__ = [
    "OracleResult",
    "PlanEvaluation",
    "brute_force",
    "evaluate_plan",
    "export_table",
    "is_degenerate",
    "oracle_table",
    "select_best",
    "check_plan_budget",
    "count_plans",
    "enumerate_plans",
    "EnumerationBudgetError",
    "OracleError",
    "OracleSolveError",
]
