"""Brute-force bilevel solver: clear the market for every plan and keep the best."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.lp_market import ExpansionPlan, MarketOutcome, compute_surpluses, solve_wsm
from src.milp_reform import (
    FeeTrajectory,
    PlanningInfeasibleError,
    ProfitBreakdown,
    ReformulationError,
    profit_breakdown,
    solve_planning,
)
from src.network_model import CaseStudy, build_index
from src.solver_iface import SolverError, SolverSettings

from .config import (
    ACTIVE_TOLERANCE,
    DEFAULT_BUDGET,
    DEFAULT_PARALLELISM,
    TABLE_COLUMNS,
    TIE_TOLERANCE,
)
from .enumeration import Caps, enumerate_plans
from .exceptions import OracleError, OracleSolveError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlanEvaluation:
    """Discounted accounting of one enumerated plan."""
    plan_id: int
    plan: ExpansionPlan
    breakdown: ProfitBreakdown
    total_mw: float
    degenerate: bool = False

    @property
    def profit(self) -> float:
        return self.breakdown.transco_profit

    @property
    def welfare(self) -> float:
        return self.breakdown.social_welfare


@dataclass(frozen=True)
class OracleResult:
    """Best plan over the enumerated space and the full per-plan table."""
    kappa: float
    best_plan: ExpansionPlan
    best_profit: float
    best_id: int
    evaluations: Tuple[PlanEvaluation, ...]
    refined: bool = False

    @property
    def plans_enumerated(self) -> int:
        return len(self.evaluations)

    @property
    def per_plan_table(self) -> Dict[ExpansionPlan, PlanEvaluation]:
        return {evaluation.plan: evaluation for evaluation in self.evaluations}

    def profit_of(self, plan: ExpansionPlan) -> float:
        """Oracle profit of a plan from the table."""
        try:
            return self.per_plan_table[plan].profit
        except KeyError:
            raise OracleError(f"Plan {plan} is outside the enumerated space")

    def best_welfare(self) -> PlanEvaluation:
        return max(self.evaluations, key=lambda e: (e.welfare, -e.plan_id))


def is_degenerate(outcome: MarketOutcome, case: CaseStudy, tol: float = ACTIVE_TOLERANCE) -> bool:
    """True when some slice has more active limits than free dimensions.

    Per slice the market has ``bids - 1`` degrees of freedom once balance,
    flow definitions and the reference angle are fixed; more active limits
    than that at a vertex mean the duals need not be unique.
    """
    index = build_index(case)
    q = outcome.dispatch
    at_bid_limits = (
        (np.abs(index.bid_q_max - q) <= tol).astype(int)
        + (np.abs(q - index.bid_q_min) <= tol).astype(int))
    theta = outcome.angles[:, 1:]
    theta_max = index.theta_max[np.newaxis, 1:]
    at_line_limits = (
        (np.abs(outcome.capacity - outcome.flows) <= tol).astype(int)
        + (np.abs(outcome.capacity + outcome.flows) <= tol).astype(int)).sum(axis=1)
    at_angle_limits = (
        (np.abs(theta_max - theta) <= tol).astype(int)
        + (np.abs(theta_max + theta) <= tol).astype(int)).sum(axis=1)
    for k, bids in enumerate(index.slice_bids):
        active = at_bid_limits[bids].sum() + at_line_limits[k] + at_angle_limits[k]
        if active > len(bids) - 1:
            return True
    return False


def evaluate_plan(
    case: CaseStudy,
    plan: ExpansionPlan,
    kappa: float,
    plan_id: int = 0,
    settings: Optional[SolverSettings] = None,
    refine_ties: bool = False,
) -> PlanEvaluation:
    """Clear the market for one plan and compute the Transco profit.

    Args:
        refine_ties: Pick, among all optimal market outcomes, the one most
            favorable to the Transco (fixed-plan planning LP) instead of the
            backend's outcome. Plans whose market duals exceed the case's
            big-M fall back to the backend's outcome.

    Raises:
        OracleSolveError: If the market cannot be cleared for the plan.
    """
    if refine_ties:
        try:
            solution = solve_planning(case, kappa, settings, check_big_m=False, fixed_plan=plan)
        except PlanningInfeasibleError as e:
            # M lies below a flow-limit dual of this plan
            logger.warning(f"Optimistic evaluation of {plan.describe(case)} infeasible ({e}); "
                           f"using the backend's market outcome")
            refine_ties = False
    try:
        if refine_ties:
            breakdown = solution.recomputation.breakdown
            outcome = solution.outcome
        else:
            outcome = solve_wsm(case, plan, settings)
            if not outcome.is_optimal:
                raise OracleSolveError(
                    f"Market for {plan.describe(case)} is {outcome.status.value}", plan)
            report = compute_surpluses(outcome, case)
            breakdown = profit_breakdown(case, plan, report, FeeTrajectory.from_report(report, kappa))
    except (SolverError, ReformulationError) as e:
        raise OracleSolveError(f"Market for {plan.describe(case)} failed: {e}", plan) from e

    return PlanEvaluation(
        plan_id=plan_id,
        plan=plan,
        breakdown=breakdown,
        total_mw=plan.total_mw(case),
        degenerate=is_degenerate(outcome, case),
    )


def select_best(evaluations: Sequence[PlanEvaluation]) -> PlanEvaluation:
    """Highest profit; near-ties go to fewer MW built, then the earlier plan."""
    if not evaluations:
        raise OracleError('No plans to select from')
    top = max(e.profit for e in evaluations)
    tied = [e for e in evaluations if e.profit >= top - TIE_TOLERANCE * (1.0 + abs(top))]
    return min(tied, key=lambda e: (e.total_mw, e.plan_id))


def brute_force(
    case: CaseStudy,
    kappa: Optional[float] = None,
    caps: Caps = None,
    refine_ties: bool = False,
    parallelism: int = DEFAULT_PARALLELISM,
    settings: Optional[SolverSettings] = None,
    budget: int = DEFAULT_BUDGET,
) -> OracleResult:
    """Enumerate every plan, clear the market for each and return the most profitable.

    Args:
        case: Case study.
        kappa: Incentive share; defaults to ``case.policy.kappa``.
        caps: Lumps considered per line (see ``enumerate_plans``).
        refine_ties: Evaluate each plan at the market outcome most
            favorable to the Transco.
        parallelism: Worker threads for the per-plan solves.
        settings: Solver settings.
        budget: Largest number of plans to enumerate.

    Returns:
        Result whose table follows enumeration order regardless of
        ``parallelism``.

    Raises:
        EnumerationBudgetError: If the plan space is too large.
        OracleSolveError: If any plan fails; the error names the plan.
    """
    kappa = case.policy.kappa if kappa is None else float(kappa)
    plans = enumerate_plans(case, caps, budget)

    def evaluate(item: Tuple[int, ExpansionPlan]) -> PlanEvaluation:
        plan_id, plan = item
        return evaluate_plan(case, plan, kappa, plan_id, settings, refine_ties)

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as executor:
            evaluations: List[PlanEvaluation] = list(executor.map(evaluate, enumerate(plans)))
    else:
        evaluations = [evaluate(item) for item in enumerate(plans)]

    degenerate = sum(e.degenerate for e in evaluations)
    if degenerate and not refine_ties:
        logger.warning(
            f"{degenerate} of {len(evaluations)} plans have degenerate market outcomes; "
            f"profits use the backend's duals (set refine_ties to choose them optimistically)")

    best = select_best(evaluations)
    logger.info(
        f"Oracle at kappa={kappa:g}: best {best.plan.describe(case)} "
        f"with profit {best.profit:.6g} over {len(evaluations)} plans")
    return OracleResult(
        kappa=kappa,
        best_plan=best.plan,
        best_profit=best.profit,
        best_id=best.plan_id,
        evaluations=tuple(evaluations),
        refined=refine_ties,
    )


def oracle_table(result: OracleResult, case: CaseStudy) -> pd.DataFrame:
    """One row per plan and built line; the empty plan gets a single row without a line."""
    rows = []
    for e in result.evaluations:
        common = {
            'plan_id': e.plan_id,
            'profit': e.profit,
            'welfare': e.welfare,
            'fee_total': e.breakdown.fee_total,
            'ms_total': e.breakdown.ms_total,
            'cost_total': e.breakdown.cost_total,
        }
        records = list(e.plan.to_records(case)) or [{'line': None, 'year': None, 'lump_mw': 0.0}]
        for record in records:
            rows.append({**common, **record})
    table = pd.DataFrame(rows, columns=list(TABLE_COLUMNS))
    return table.astype({'line': 'Int64', 'year': 'Int64'})


def export_table(result: OracleResult, case: CaseStudy, path: Union[str, Path]) -> Path:
    """Write the per-plan table as CSV.

    Raises:
        OSError: If the file cannot be written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    oracle_table(result, case).to_csv(path, index=False, float_format='%.6g')
    logger.info(f"Oracle table with {result.plans_enumerated} plans written to {path}")
    return path
