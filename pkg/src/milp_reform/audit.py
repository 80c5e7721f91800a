"""Post-solve checks that the big-M envelopes did not cut optimal duals."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.lp_market import ExpansionPlan, solve_wsm
from src.network_model import CaseStudy
from src.solver_iface import SolverSettings

from .config import ENVELOPE_TOLERANCE
from .formulation import plan_values
from .planning import PlanningSolution

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnvelopeAudit:
    """Findings of an envelope audit.

    Attributes:
        max_residual: Largest ``|y - b * mu|`` over all envelopes.
        mu_at_bound: Some flow-limit dual of an expandable line sits on M.
        y_at_bound: Some envelope variable sits on M.
        baseline_mu: Largest flow-limit dual of an expandable line in the
            market cleared without expansion (NaN if not computed).
        plan_mu: The same for the market cleared with the returned plan.

    Duals sitting on M inside the planning solution are reported but do
    not flag the audit on their own: where a flow limit is degenerate the
    model may place its dual anywhere up to M. Independent market runs
    give the dual values that M has to dominate.
    """
    big_m: float
    max_residual: float
    mu_at_bound: bool
    y_at_bound: bool
    baseline_mu: float
    plan_mu: float = float('nan')
    tol: float = ENVELOPE_TOLERANCE
    reasons: List[str] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return bool(self.reasons)

    def to_dict(self) -> dict:
        return {
            'big_m': self.big_m,
            'max_residual': self.max_residual,
            'mu_at_bound': self.mu_at_bound,
            'y_at_bound': self.y_at_bound,
            'baseline_mu': None if np.isnan(self.baseline_mu) else self.baseline_mu,
            'plan_mu': None if np.isnan(self.plan_mu) else self.plan_mu,
            'flagged': self.flagged,
            'reasons': list(self.reasons),
        }


def _largest_limit_dual(
    case: CaseStudy,
    plan: ExpansionPlan,
    expandable: np.ndarray,
    settings: Optional[SolverSettings],
) -> float:
    outcome = solve_wsm(case, plan, settings)
    if not outcome.is_optimal:
        logger.warning(f"Market for {plan.describe(case)} not optimal "
                       f"({outcome.status.value}); dual check skipped")
        return float('nan')
    return float(max(outcome.mu_max[:, expandable].max(), outcome.mu_min[:, expandable].max()))


def envelope_audit(
    solution: PlanningSolution,
    case: CaseStudy,
    settings: Optional[SolverSettings] = None,
    baseline: bool = True,
    tol: float = ENVELOPE_TOLERANCE,
) -> EnvelopeAudit:
    """Check envelope consistency and whether M is large enough.

    Args:
        solution: Planning solution to audit.
        case: Case it was solved on.
        settings: Solver settings for the independent market runs.
        baseline: Clear the market without expansion and with the returned
            plan and compare their flow-limit duals with M.
        tol: Relative tolerance, scaled by ``1 + M``.

    Returns:
        Audit; ``flagged`` is true when any finding shows M is too small.
    """
    envelopes = solution.envelopes
    layout = envelopes.layout
    big_m = envelopes.big_m
    slack = tol * (1.0 + big_m)
    outcome = solution.outcome

    lump_values, _ = plan_values(case, layout, solution.plan)
    keys = layout.envelope_keys
    binary = lump_values[layout.envelope_lump]
    residual = 0.0
    if layout.n_envelopes:
        mu_max = outcome.mu_max[keys[:, 0], keys[:, 2]]
        mu_min = outcome.mu_min[keys[:, 0], keys[:, 2]]
        residual = float(max(
            np.abs(envelopes.y_max - binary * mu_max).max(),
            np.abs(envelopes.y_min - binary * mu_min).max(),
        ))

    expandable = np.array([bool(line.lumps) for line in case.lines], dtype=bool)
    mu = np.concatenate([
        outcome.mu_max[:, expandable].ravel(), outcome.mu_min[:, expandable].ravel()])
    y = np.concatenate([envelopes.y_max, envelopes.y_min])
    mu_at_bound = bool(mu.size and mu.max() >= big_m - slack)
    y_at_bound = bool(y.size and y.max() >= big_m - slack)
    if mu_at_bound or y_at_bound:
        logger.warning(f"Planning solution at kappa={solution.kappa:g} has duals on M={big_m:g}")

    baseline_mu = plan_mu = float('nan')
    if baseline and expandable.any():
        baseline_mu = _largest_limit_dual(case, ExpansionPlan.empty(), expandable, settings)
        plan_mu = _largest_limit_dual(case, solution.plan, expandable, settings)

    reasons = []
    if residual > slack:
        reasons.append(f"envelope residual {residual:.3g} exceeds {slack:.3g}")
    if not np.isnan(baseline_mu) and baseline_mu > big_m:
        reasons.append(f"no-expansion flow-limit dual {baseline_mu:.6g} exceeds M={big_m:g}")
    if not np.isnan(plan_mu) and plan_mu > big_m:
        reasons.append(f"flow-limit dual {plan_mu:.6g} of the returned plan exceeds M={big_m:g}")

    audit = EnvelopeAudit(
        big_m=big_m,
        max_residual=residual,
        mu_at_bound=mu_at_bound,
        y_at_bound=y_at_bound,
        baseline_mu=baseline_mu,
        plan_mu=plan_mu,
        tol=tol,
        reasons=reasons,
    )
    if audit.flagged:
        logger.error(f"Envelope audit at kappa={solution.kappa:g} flagged: {'; '.join(reasons)}")
    return audit
