"""Wholesale market clearing LP for a fixed expansion plan.

All variables are free; quantity, flow and angle limits are explicit
``<=`` rows so every limit has its own dual:

    max  sum c^d d - sum c^g g
    s.t. -sum g + sum d + sum_l S f - sum_l R f = 0     [pi]
         q <= q_max                                     [phi_max]
         -q <= -q_min                                   [phi_min]
         f - base_mva * B (theta_from - theta_to) = 0   [gamma]
         f <= cap,  -f <= cap                           [mu_max, mu_min]
         theta <= theta_max, -theta <= theta_max        [xi_max, xi_min]  (b != ref)
         theta_ref = 0                                  [chi]
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.network_model import CaseIndex, CaseStudy, build_index
from src.solver_iface import (
    ModelHandle,
    ModelSpec,
    Relation,
    Sense,
    SolverSettings,
    SolveStatus,
    build_model,
    optimize,
)

from .outcome import MarketOutcome
from .plan import ExpansionPlan

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarketBlocks:
    """Indices of the market primal inside a larger model.

    ``q`` is aligned with ``bid_index`` (positions in ``case.bids``); slice
    arrays have one row per entry of ``slices``.
    """
    slices: np.ndarray
    bid_index: np.ndarray
    bid_local_slice: np.ndarray
    q: np.ndarray
    f: np.ndarray
    theta: np.ndarray
    balance: np.ndarray
    q_max: np.ndarray
    q_min: np.ndarray
    flow_def: np.ndarray
    theta_max: np.ndarray
    theta_min: np.ndarray
    theta_ref: np.ndarray


def market_bids(index: CaseIndex, slices: Sequence[int]) -> np.ndarray:
    """Bid positions of the given slices, slice by slice."""
    parts = [index.slice_bids[k] for k in slices]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=int)


def add_market_primal(
    spec: ModelSpec,
    case: CaseStudy,
    index: CaseIndex,
    slices: Sequence[int],
    with_objective: bool = True,
) -> MarketBlocks:
    """Add dispatch, flow and angle variables with every market row except flow limits.

    Args:
        with_objective: Add the hourly welfare to the model objective.

    Returns:
        Block indices; flow-limit rows are left to the caller.
    """
    slices = np.asarray(slices, dtype=int)
    n_s, n_b, n_l = len(slices), index.n_nodes, index.n_lines
    bids = market_bids(index, slices)
    if np.any(np.diff(slices) <= 0):
        raise ValueError('slices must be given in increasing order')
    local = np.searchsorted(slices, index.bid_slice[bids])
    n_q = len(bids)
    is_gen = index.bid_is_generator[bids]

    q = spec.add_variables('q', n_q, lb=-np.inf)
    f = spec.add_variables('f', n_s * n_l, lb=-np.inf).reshape(n_s, n_l)
    theta = spec.add_variables('theta', n_s * n_b, lb=-np.inf).reshape(n_s, n_b)

    s_idx, l_idx = np.meshgrid(np.arange(n_s), np.arange(n_l), indexing='ij')
    s_idx, l_idx = s_idx.ravel(), l_idx.ravel()
    balance = spec.add_constraints(
        'balance',
        rows=np.concatenate([
            local * n_b + index.bid_node[bids],
            s_idx * n_b + index.line_from[l_idx],
            s_idx * n_b + index.line_to[l_idx],
        ]),
        cols=np.concatenate([q, f[s_idx, l_idx], f[s_idx, l_idx]]),
        vals=np.concatenate([
            np.where(is_gen, -1.0, 1.0), np.ones(n_s * n_l), -np.ones(n_s * n_l)]),
        relation=Relation.EQ,
        rhs=np.zeros(n_s * n_b),
    )
    q_max = spec.add_constraints(
        'q_max', np.arange(n_q), q, 1.0, Relation.LE, index.bid_q_max[bids])
    q_min = spec.add_constraints(
        'q_min', np.arange(n_q), q, -1.0, Relation.LE, -index.bid_q_min[bids])

    weight = case.base_mva * index.susceptance[l_idx]
    flow_rows = s_idx * n_l + l_idx
    flow_def = spec.add_constraints(
        'flow_def',
        rows=np.concatenate([flow_rows, flow_rows, flow_rows]),
        cols=np.concatenate([
            f[s_idx, l_idx], theta[s_idx, index.line_from[l_idx]], theta[s_idx, index.line_to[l_idx]]]),
        vals=np.concatenate([np.ones(n_s * n_l), -weight, weight]),
        relation=Relation.EQ,
        rhs=np.zeros(n_s * n_l),
    )

    free = theta[:, 1:].ravel()
    limit = np.tile(index.theta_max[1:], n_s)
    theta_max = spec.add_constraints(
        'theta_max', np.arange(free.size), free, 1.0, Relation.LE, limit, count=free.size)
    theta_min = spec.add_constraints(
        'theta_min', np.arange(free.size), free, -1.0, Relation.LE, limit, count=free.size)
    theta_ref = spec.add_constraints(
        'theta_ref', np.arange(n_s), theta[:, 0], 1.0, Relation.EQ, np.zeros(n_s), count=n_s)

    if with_objective:
        spec.add_objective_terms((q, np.where(is_gen, -1.0, 1.0) * index.bid_price[bids]))
    return MarketBlocks(
        slices=slices,
        bid_index=bids,
        bid_local_slice=local,
        q=q,
        f=f,
        theta=theta,
        balance=balance.reshape(n_s, n_b),
        q_max=q_max,
        q_min=q_min,
        flow_def=flow_def.reshape(n_s, n_l),
        theta_max=theta_max.reshape(n_s, n_b - 1),
        theta_min=theta_min.reshape(n_s, n_b - 1),
        theta_ref=theta_ref,
    )


def slice_capacity(case: CaseStudy, index: CaseIndex, plan: ExpansionPlan) -> np.ndarray:
    """Slices x lines flow limits for a plan."""
    by_year = plan.capacity_matrix(case)
    return np.array([by_year[t - 1] for t, _ in index.time_slices]).reshape(
        index.n_slices, index.n_lines)


def _build(
    case: CaseStudy, index: CaseIndex, plan: ExpansionPlan, slices: Sequence[int]
) -> ModelHandle:
    spec = ModelSpec(f"wsm[{','.join(str(k) for k in slices)}]")
    blocks = add_market_primal(spec, case, index, slices)
    cap = slice_capacity(case, index, plan)[np.asarray(slices, dtype=int)].ravel()
    flows = blocks.f.ravel()
    spec.add_constraints('flow_max', np.arange(flows.size), flows, 1.0, Relation.LE, cap,
                         count=flows.size)
    spec.add_constraints('flow_min', np.arange(flows.size), flows, -1.0, Relation.LE, cap,
                         count=flows.size)
    spec.sense = Sense.MAXIMIZE
    return build_model(spec)


def build_wsm_lp(
    case: CaseStudy, plan: ExpansionPlan, slices: Optional[Sequence[int]] = None
) -> ModelHandle:
    """Build the market clearing LP.

    Args:
        case: Case study.
        plan: Expansion plan fixing the flow limits.
        slices: Positions of the (year, period) slices to include, in
            increasing order; all slices when omitted.

    Returns:
        LP handle with variable blocks ``q``, ``f``, ``theta`` and row blocks
        named after the constraints they hold.

    Raises:
        InvalidPlanError: If the plan does not fit the case.
    """
    plan.validate_for(case)
    index = build_index(case)
    if slices is None:
        slices = range(index.n_slices)
    return _build(case, index, plan, list(slices))


def solve_wsm(
    case: CaseStudy,
    plan: ExpansionPlan,
    settings: Optional[SolverSettings] = None,
    decompose: bool = True,
) -> MarketOutcome:
    """Clear the market for a fixed plan.

    Years couple only through the plan, so by default every (year, period)
    slice is solved as its own LP and the results are stitched together.

    Args:
        case: Case study.
        plan: Expansion plan.
        settings: Solver settings.
        decompose: Solve per slice instead of one horizon-wide LP.

    Returns:
        Outcome with primal values and all duals. A non-optimal slice
        (e.g. nonzero q_min that cannot be met) gives a non-optimal status
        and NaN arrays for that slice.

    Raises:
        InvalidPlanError: If the plan does not fit the case.
        BackendError: If the solver fails.
    """
    plan.validate_for(case)
    index = build_index(case)
    n_s, n_b, n_l = index.n_slices, index.n_nodes, index.n_lines
    groups = [[k] for k in range(n_s)] if decompose else [list(range(n_s))]
    capacity = slice_capacity(case, index, plan)

    def nan(*shape):
        return np.full(shape, np.nan)

    dispatch, phi_max, phi_min = nan(index.n_bids), nan(index.n_bids), nan(index.n_bids)
    flows, gamma, mu_max, mu_min = nan(n_s, n_l), nan(n_s, n_l), nan(n_s, n_l), nan(n_s, n_l)
    angles, prices = nan(n_s, n_b), nan(n_s, n_b)
    xi_max, xi_min, chi = np.zeros((n_s, n_b)), np.zeros((n_s, n_b)), nan(n_s)
    status = SolveStatus.OPTIMAL
    backend, wall_time, kkt_passed = '', 0.0, True

    for group in groups:
        handle = _build(case, index, plan, group)
        result = optimize(handle, settings)
        backend = result.backend
        wall_time += result.wall_time
        if not result.is_optimal:
            logger.warning(f"Market slices {group} not optimal: {result.status.value}")
            status = result.status
            continue
        kkt_passed &= result.kkt is None or result.kkt.passed

        x, y = result.x, result.duals
        rows = np.asarray(group)
        bids = market_bids(index, group)
        dispatch[bids] = x[handle.var_block('q')]
        phi_max[bids] = y[handle.row_block('q_max')]
        phi_min[bids] = y[handle.row_block('q_min')]
        flows[rows] = x[handle.var_block('f')].reshape(len(group), n_l)
        angles[rows] = x[handle.var_block('theta')].reshape(len(group), n_b)
        prices[rows] = y[handle.row_block('balance')].reshape(len(group), n_b)
        gamma[rows] = y[handle.row_block('flow_def')].reshape(len(group), n_l)
        mu_max[rows] = y[handle.row_block('flow_max')].reshape(len(group), n_l)
        mu_min[rows] = y[handle.row_block('flow_min')].reshape(len(group), n_l)
        xi_max[rows, 1:] = y[handle.row_block('theta_max')].reshape(len(group), n_b - 1)
        xi_min[rows, 1:] = y[handle.row_block('theta_min')].reshape(len(group), n_b - 1)
        chi[rows] = y[handle.row_block('theta_ref')]

    signed = np.where(index.bid_is_generator, -1.0, 1.0) * index.bid_price * dispatch
    slice_objective = np.array([signed[index.slice_bids[k]].sum() for k in range(n_s)])

    outcome = MarketOutcome(
        plan=plan,
        status=status,
        time_slices=index.time_slices,
        dispatch=dispatch,
        phi_max=phi_max,
        phi_min=phi_min,
        flows=flows,
        angles=angles,
        prices=prices,
        gamma=gamma,
        mu_max=mu_max,
        mu_min=mu_min,
        xi_max=xi_max,
        xi_min=xi_min,
        chi=chi,
        capacity=capacity,
        slice_objective=slice_objective,
        backend=backend,
        wall_time=wall_time,
        kkt_passed=kkt_passed,
    )
    logger.debug(
        f"Market cleared for {plan.describe(case)}: welfare/h={outcome.objective:.6g}, "
        f"status={status.value}, {len(groups)} LP(s), {wall_time:.3f}s")
    return outcome
