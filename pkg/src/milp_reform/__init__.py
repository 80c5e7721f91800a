"""Single-level planning model for the Transco under the incentive fee."""

from .accounting import FeeTrajectory, ProfitBreakdown, profit_breakdown
from .audit import EnvelopeAudit, envelope_audit
from .exceptions import (
    BigMError,
    CertificationFailure,
    PlanningInfeasibleError,
    ReformulationError,
)
from .export import export_solution, solution_to_dict
from .formulation import PlanningLayout, assemble_milp, plan_values, planning_layout
from .planning import (
    BigMEnvelope,
    PlanningSolution,
    PrimalRecomputation,
    recompute_metrics_from_primal,
    solve_planning,
)

__version__ = "1.0.0"
__all__ = [
    "FeeTrajectory",
    "ProfitBreakdown",
    "profit_breakdown",
    "EnvelopeAudit",
    "envelope_audit",
    "BigMError",
    "CertificationFailure",
    "PlanningInfeasibleError",
    "ReformulationError",
    "export_solution",
    "solution_to_dict",
    "PlanningLayout",
    "assemble_milp",
    "plan_values",
    "planning_layout",
    "BigMEnvelope",
    "PlanningSolution",
    "PrimalRecomputation",
    "recompute_metrics_from_primal",
    "solve_planning",
]
