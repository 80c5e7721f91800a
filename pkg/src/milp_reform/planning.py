"""Solving the planning model and reading a plan back out of it."""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional

import numpy as np

from src.duality_check import DualCertificate, certify
from src.lp_market import (
    ExpansionPlan,
    MarketOutcome,
    Selection,
    SurplusReport,
    compute_surpluses,
    market_bids,
    slice_capacity,
)
from src.network_model import CaseIndex, CaseStudy, build_index
from src.solver_iface import ModelHandle, SolverSettings, SolveResult, SolveStatus, optimize

from .accounting import FeeTrajectory, ProfitBreakdown, profit_breakdown
from .config import BINARY_THRESHOLD, RECOMPUTE_TOLERANCE
from .exceptions import CertificationFailure, PlanningInfeasibleError, ReformulationError
from .formulation import PlanningLayout, assemble_milp, planning_layout

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BigMEnvelope:
    """Envelope values, one entry per row of ``layout.envelope_keys``."""
    layout: PlanningLayout
    y_max: np.ndarray
    y_min: np.ndarray
    big_m: float


@dataclass(frozen=True)
class PlanningSolution:
    """Plan, fee and embedded market outcome read from a planning solve.

    Attributes:
        objective: Discounted Transco profit reported by the solver.
        surplus: Hourly participant surplus per year as expressed inside the
            model through bound duals.
        proven: False when the solver stopped at a limit with an incumbent.
        certificate: Optimality certificate of the embedded market outcome;
            None when the solve is not proven.
        recomputation: Values recomputed from the extracted primal.
    """
    kappa: float
    plan: ExpansionPlan
    fee: FeeTrajectory
    outcome: MarketOutcome
    objective: float
    envelopes: BigMEnvelope
    surplus: Dict[int, float]
    status: SolveStatus
    proven: bool
    gap: Optional[float] = None
    wall_time: float = 0.0
    statistics: Dict[str, int] = field(default_factory=dict)
    certificate: Optional[DualCertificate] = None
    recomputation: Optional['PrimalRecomputation'] = None

    @property
    def certified(self) -> bool:
        """Proven, certificate passed and recomputed values consistent."""
        return (
            self.proven
            and self.certificate is not None
            and self.certificate.passed
            and self.recomputation is not None
            and self.recomputation.consistent
        )


@dataclass(frozen=True)
class PrimalRecomputation:
    """Surpluses, fees and profit recomputed from prices and quantities.

    Residuals are scaled: surplus and fee residuals by
    ``1 + psi * max hourly welfare``, the profit residual by
    ``1 + |objective|``.
    """
    report: SurplusReport
    fee: FeeTrajectory
    breakdown: ProfitBreakdown
    surplus_residual: float
    fee_residual: float
    profit_residual: float
    tol: float = RECOMPUTE_TOLERANCE

    @property
    def consistent(self) -> bool:
        return max(self.surplus_residual, self.fee_residual, self.profit_residual) <= self.tol

    def residuals(self) -> Dict[str, float]:
        return {
            'surplus': self.surplus_residual,
            'fee': self.fee_residual,
            'profit': self.profit_residual,
        }


def _extract_plan(
    case: CaseStudy, layout: PlanningLayout, lump_values: np.ndarray
) -> ExpansionPlan:
    chosen = np.flatnonzero(lump_values > BINARY_THRESHOLD)
    return ExpansionPlan(tuple(
        Selection(case.lines[int(pos)].id, int(t), int(j))
        for t, pos, j in layout.lump_keys[chosen]
    ))


def _extract_outcome(
    case: CaseStudy,
    index: CaseIndex,
    handle: ModelHandle,
    result: SolveResult,
    plan: ExpansionPlan,
) -> MarketOutcome:
    n_s, n_b, n_l = index.n_slices, index.n_nodes, index.n_lines

    def block(name: str, *shape: int) -> np.ndarray:
        return result.values(handle, name).reshape(shape) if shape else result.values(handle, name)

    bids = market_bids(index, range(n_s))
    dispatch = np.empty(index.n_bids)
    phi_max = np.empty(index.n_bids)
    phi_min = np.empty(index.n_bids)
    dispatch[bids] = block('q')
    phi_max[bids] = block('phi_max')
    phi_min[bids] = block('phi_min')

    xi_max = np.zeros((n_s, n_b))
    xi_min = np.zeros((n_s, n_b))
    xi_max[:, 1:] = block('xi_max', n_s, n_b - 1)
    xi_min[:, 1:] = block('xi_min', n_s, n_b - 1)

    signed = np.where(index.bid_is_generator, -1.0, 1.0) * index.bid_price * dispatch
    return MarketOutcome(
        plan=plan,
        status=SolveStatus.OPTIMAL if result.is_optimal else result.status,
        time_slices=index.time_slices,
        dispatch=dispatch,
        phi_max=phi_max,
        phi_min=phi_min,
        flows=block('f', n_s, n_l),
        angles=block('theta', n_s, n_b),
        prices=block('pi', n_s, n_b),
        gamma=block('gamma', n_s, n_l),
        mu_max=block('mu_max', n_s, n_l),
        mu_min=block('mu_min', n_s, n_l),
        xi_max=xi_max,
        xi_min=xi_min,
        chi=block('chi'),
        capacity=slice_capacity(case, index, plan),
        slice_objective=np.array([signed[index.slice_bids[k]].sum() for k in range(n_s)]),
        backend=result.backend,
        wall_time=result.wall_time,
    )


def recompute_metrics_from_primal(
    solution: PlanningSolution,
    case: CaseStudy,
    tol: float = RECOMPUTE_TOLERANCE,
    strict: bool = True,
) -> PrimalRecomputation:
    """Recompute surpluses, fees and profit from extracted prices and quantities.

    Args:
        solution: Planning solution.
        case: Case it was solved on.
        tol: Threshold on the scaled residuals.
        strict: Raise instead of returning an inconsistent recomputation.

    Returns:
        Recomputed values with residuals against the model's own values.

    Raises:
        CertificationFailure: If ``strict`` and a residual exceeds ``tol``;
            usually an undersized big-M or a loose gap.
    """
    report = compute_surpluses(solution.outcome, case)
    fee = FeeTrajectory.from_report(report, solution.kappa)
    breakdown = profit_breakdown(case, solution.plan, report, fee)

    scale = 1.0 + report.psi * max(abs(report.welfare(t)) for t in report.years)
    surplus_residual = max(
        report.psi * abs(report.participant_surplus(t) - solution.surplus[t]) for t in report.years)
    fee_residual = max(abs(fee[t] - solution.fee[t]) for t in report.years)
    recomputation = PrimalRecomputation(
        report=report,
        fee=fee,
        breakdown=breakdown,
        surplus_residual=surplus_residual / scale,
        fee_residual=fee_residual / scale,
        profit_residual=abs(breakdown.transco_profit - solution.objective)
        / (1.0 + abs(solution.objective)),
        tol=tol,
    )
    if not recomputation.consistent:
        message = (
            f"Recomputed values disagree with the planning model at kappa={solution.kappa:g}: "
            f"{recomputation.residuals()}")
        logger.error(message)
        if strict:
            raise CertificationFailure(message, recomputation.residuals())
    return recomputation


def solve_planning(
    case: CaseStudy,
    kappa: Optional[float] = None,
    settings: Optional[SolverSettings] = None,
    check_big_m: bool = True,
    fixed_plan: Optional[ExpansionPlan] = None,
    tol: float = RECOMPUTE_TOLERANCE,
) -> PlanningSolution:
    """Solve the planning model for one kappa.

    Args:
        case: Case study.
        kappa: Incentive share; defaults to ``case.policy.kappa``.
        settings: Solver settings.
        check_big_m: Refuse an M below the largest bid price.
        fixed_plan: Evaluate this plan instead of choosing one.
        tol: Tolerance of the certificate and of the recomputation.

    Returns:
        Solution with its certificate and recomputation attached. A solve
        stopped by a time limit returns the incumbent with ``proven`` False.

    Raises:
        PlanningInfeasibleError: If the model is infeasible or unbounded.
        ReformulationError: If the solver stopped without any incumbent.
    """
    kappa = case.policy.kappa if kappa is None else float(kappa)
    handle = assemble_milp(case, kappa, fixed_plan=fixed_plan, check_big_m=check_big_m)
    result = optimize(handle, settings, check=False)

    if result.status in (SolveStatus.INFEASIBLE, SolveStatus.UNBOUNDED):
        raise PlanningInfeasibleError(
            f"Planning model at kappa={kappa:g} is {result.status.value}: {result.message}")
    if not result.has_solution:
        raise ReformulationError(
            f"Planning solve at kappa={kappa:g} stopped without an incumbent: {result.message}")

    proven = result.is_optimal
    if not proven:
        logger.warning(
            f"Planning solve at kappa={kappa:g} hit a limit; returning unproven incumbent "
            f"(gap={result.gap})")

    index = build_index(case)
    layout = planning_layout(case, index)
    plan = _extract_plan(case, layout, result.values(handle, 'b_lump'))
    outcome = _extract_outcome(case, index, handle, result, plan)
    fees = result.values(handle, 'fee')
    surplus = result.values(handle, 'surplus')

    solution = PlanningSolution(
        kappa=kappa,
        plan=plan,
        fee=FeeTrajectory(kappa=kappa, fees={t: float(fees[i]) for i, t in enumerate(case.years)}),
        outcome=outcome,
        objective=float(result.objective),
        envelopes=BigMEnvelope(
            layout=layout,
            y_max=result.values(handle, 'y_max'),
            y_min=result.values(handle, 'y_min'),
            big_m=case.policy.big_m,
        ),
        surplus={t: float(surplus[i]) for i, t in enumerate(case.years)},
        status=result.status,
        proven=proven,
        gap=result.gap,
        wall_time=result.wall_time,
        statistics=handle.statistics(),
    )

    certificate = certify(outcome, case, plan, tol=tol) if proven else None
    recomputation = recompute_metrics_from_primal(solution, case, tol=tol, strict=False)
    solution = replace(solution, certificate=certificate, recomputation=recomputation)

    logger.info(
        f"kappa={kappa:g}: {plan.describe(case)}, profit={solution.objective:.6g}, "
        f"gap={result.gap}, time={result.wall_time:.3f}s, stats={solution.statistics}, "
        f"certified={solution.certified}")
    return solution
