"""Single-level planning MILP.

The market of every (year, period) slice enters three times: its primal
rows, its dual rows and one strong-duality row equating the two
objectives. Products of expansion binaries and flow-limit duals are
replaced by envelope variables ``y`` kept within ``[0, M]``:

    y <= M b,    y <= mu,    mu - y + M b <= M

The Transco maximizes discounted merchandising surplus plus incentive fee
minus investment cost. Merchandising surplus and participant surplus are
written with bound duals instead of price times quantity, so the whole
model stays linear.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from src.lp_market import ExpansionPlan, MarketBlocks, add_market_primal
from src.network_model import CaseIndex, CaseStudy, build_index, max_bid_price
from src.solver_iface import (
    ModelHandle,
    ModelSpec,
    Relation,
    Sense,
    VarKind,
    build_model,
    fix_variables,
)

from .exceptions import BigMError, ReformulationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlanningLayout:
    """Positional keys of the investment and envelope variables.

    Attributes:
        lump_keys: One row ``(year, line position, lump position)`` per
            expansion binary, years outermost.
        lump_mw: Size of the lump behind each binary.
        envelope_keys: One row ``(slice, build year, line position, lump
            position)`` per envelope pair; only build years ``2 <= t_hat <= t``
            of lines with a lump menu appear.
        envelope_lump: Position in ``lump_keys`` of each envelope's binary.
    """
    lump_keys: np.ndarray
    lump_mw: np.ndarray
    envelope_keys: np.ndarray
    envelope_lump: np.ndarray
    lump_position: Dict[Tuple[int, int, int], int]

    @property
    def n_lumps(self) -> int:
        return len(self.lump_keys)

    @property
    def n_envelopes(self) -> int:
        return len(self.envelope_keys)


def planning_layout(case: CaseStudy, index: Optional[CaseIndex] = None) -> PlanningLayout:
    """Enumerate expansion binaries and envelope pairs in model order."""
    index = index or build_index(case)
    keys, sizes = [], []
    for t in case.years:
        for pos, line in enumerate(case.lines):
            for j, mw in enumerate(line.lumps):
                keys.append((t, pos, j))
                sizes.append(mw)
    position = {key: p for p, key in enumerate(keys)}

    envelopes = []
    for k, (t, _) in enumerate(index.time_slices):
        for t_hat in range(2, t + 1):
            for pos, line in enumerate(case.lines):
                for j in range(len(line.lumps)):
                    envelopes.append((k, t_hat, pos, j))

    envelope_keys = np.array(envelopes, dtype=int).reshape(-1, 4)
    return PlanningLayout(
        lump_keys=np.array(keys, dtype=int).reshape(-1, 3),
        lump_mw=np.array(sizes, dtype=float),
        envelope_keys=envelope_keys,
        envelope_lump=np.array(
            [position[(t_hat, pos, j)] for _, t_hat, pos, j in envelopes], dtype=int),
        lump_position=position,
    )


@dataclass(frozen=True)
class _Duals:
    pi: np.ndarray
    gamma: np.ndarray
    chi: np.ndarray
    phi_max: np.ndarray
    phi_min: np.ndarray
    mu_max: np.ndarray
    mu_min: np.ndarray
    xi_max: np.ndarray
    xi_min: np.ndarray


def _add_investment(
    spec: ModelSpec, case: CaseStudy, index: CaseIndex, layout: PlanningLayout
) -> Tuple[np.ndarray, np.ndarray]:
    n_y, n_l = len(case.years), index.n_lines
    keys = layout.lump_keys
    lump = spec.add_variables(
        'b_lump', layout.n_lumps, VarKind.BINARY, lb=0.0,
        ub=np.where(keys[:, 0] == 1, 0.0, 1.0))
    year_ub = np.array([0.0 if t == 1 else 1.0 for t in case.years])
    build = spec.add_variables(
        'u', n_y * n_l, VarKind.BINARY, lb=0.0, ub=np.repeat(year_ub, n_l)).reshape(n_y, n_l)

    rows = (keys[:, 0] - 1) * n_l + keys[:, 1]
    spec.add_constraints(
        'invest_link',
        rows=np.concatenate([np.arange(n_y * n_l), rows]),
        cols=np.concatenate([build.ravel(), lump]),
        vals=np.concatenate([np.ones(n_y * n_l), -np.ones(layout.n_lumps)]),
        relation=Relation.EQ,
        rhs=np.zeros(n_y * n_l),
    )
    spec.add_constraints(
        'invest_once', keys[:, 1], lump, 1.0, Relation.LE, np.ones(n_l), count=n_l)
    return lump, build


def _add_flow_limits(
    spec: ModelSpec,
    index: CaseIndex,
    layout: PlanningLayout,
    market: MarketBlocks,
    lump: np.ndarray,
) -> None:
    """``+-f - sum of lumps built so far <= F0`` per slice and line."""
    n_l = index.n_lines
    keys = layout.lump_keys
    rows, cols, vals = [], [], []
    for k, (t, _) in enumerate(index.time_slices):
        built = np.flatnonzero(keys[:, 0] <= t)
        rows.append(k * n_l + keys[built, 1])
        cols.append(lump[built])
        vals.append(-layout.lump_mw[built])
    inv_rows = np.concatenate(rows) if rows else np.zeros(0, dtype=int)
    inv_cols = np.concatenate(cols) if cols else np.zeros(0, dtype=int)
    inv_vals = np.concatenate(vals) if vals else np.zeros(0)

    flows = market.f.ravel()
    cap = np.tile(index.existing_capacity, index.n_slices)
    for name, sign in (('flow_max', 1.0), ('flow_min', -1.0)):
        spec.add_constraints(
            name,
            rows=np.concatenate([np.arange(flows.size), inv_rows]),
            cols=np.concatenate([flows, inv_cols]),
            vals=np.concatenate([np.full(flows.size, sign), inv_vals]),
            relation=Relation.LE,
            rhs=cap,
        )


def _add_market_duals(
    spec: ModelSpec, case: CaseStudy, index: CaseIndex, market: MarketBlocks
) -> _Duals:
    """Dual variables and dual constraints of every market slice."""
    n_s, n_b, n_l = index.n_slices, index.n_nodes, index.n_lines
    bids = market.bid_index
    n_q = len(bids)
    free = -np.inf

    duals = _Duals(
        pi=spec.add_variables('pi', n_s * n_b, lb=free).reshape(n_s, n_b),
        gamma=spec.add_variables('gamma', n_s * n_l, lb=free).reshape(n_s, n_l),
        chi=spec.add_variables('chi', n_s, lb=free),
        phi_max=spec.add_variables('phi_max', n_q),
        phi_min=spec.add_variables('phi_min', n_q),
        mu_max=spec.add_variables('mu_max', n_s * n_l).reshape(n_s, n_l),
        mu_min=spec.add_variables('mu_min', n_s * n_l).reshape(n_s, n_l),
        xi_max=spec.add_variables('xi_max', n_s * (n_b - 1)).reshape(n_s, n_b - 1),
        xi_min=spec.add_variables('xi_min', n_s * (n_b - 1)).reshape(n_s, n_b - 1),
    )

    # Generators: -pi + phi_max - phi_min = -c;  consumers: pi + phi_max - phi_min = c
    sign = np.where(index.bid_is_generator[bids], -1.0, 1.0)
    node_var = duals.pi[market.bid_local_slice, index.bid_node[bids]]
    positions = np.arange(n_q)
    spec.add_constraints(
        'dual_bid',
        rows=np.concatenate([positions, positions, positions]),
        cols=np.concatenate([node_var, duals.phi_max, duals.phi_min]),
        vals=np.concatenate([sign, np.ones(n_q), -np.ones(n_q)]),
        relation=Relation.EQ,
        rhs=sign * index.bid_price[bids],
    )

    s_idx, l_idx = np.meshgrid(np.arange(n_s), np.arange(n_l), indexing='ij')
    s_idx, l_idx = s_idx.ravel(), l_idx.ravel()
    flow_rows = s_idx * n_l + l_idx
    spec.add_constraints(
        'dual_flow',
        rows=np.tile(flow_rows, 5),
        cols=np.concatenate([
            duals.pi[s_idx, index.line_from[l_idx]],
            duals.pi[s_idx, index.line_to[l_idx]],
            duals.gamma.ravel(),
            duals.mu_max.ravel(),
            duals.mu_min.ravel(),
        ]),
        vals=np.concatenate([
            np.ones(n_s * n_l), -np.ones(n_s * n_l), np.ones(n_s * n_l),
            np.ones(n_s * n_l), -np.ones(n_s * n_l)]),
        relation=Relation.EQ,
        rhs=np.zeros(n_s * n_l),
    )

    # Angle stationarity: -base * sum_l B_l (S_lb - R_lb) gamma_l + xi_max - xi_min = 0,
    # with chi in place of the xi terms at the reference node.
    weight = case.base_mva * index.susceptance[l_idx]
    ends = np.concatenate([index.line_from[l_idx], index.line_to[l_idx]])
    slices = np.concatenate([s_idx, s_idx])
    gammas = np.concatenate([duals.gamma.ravel(), duals.gamma.ravel()])
    coefs = np.concatenate([-weight, weight])
    at_ref = ends == 0

    free_rows = n_s * (n_b - 1)
    spec.add_constraints(
        'dual_angle',
        rows=np.concatenate([
            slices[~at_ref] * (n_b - 1) + ends[~at_ref] - 1,
            np.arange(free_rows),
            np.arange(free_rows),
        ]),
        cols=np.concatenate([gammas[~at_ref], duals.xi_max.ravel(), duals.xi_min.ravel()]),
        vals=np.concatenate([coefs[~at_ref], np.ones(free_rows), -np.ones(free_rows)]),
        relation=Relation.EQ,
        rhs=np.zeros(free_rows),
    )
    spec.add_constraints(
        'dual_ref',
        rows=np.concatenate([slices[at_ref], np.arange(n_s)]),
        cols=np.concatenate([gammas[at_ref], duals.chi]),
        vals=np.concatenate([coefs[at_ref], np.ones(n_s)]),
        relation=Relation.EQ,
        rhs=np.zeros(n_s),
    )
    return duals


def _add_envelopes(
    spec: ModelSpec,
    layout: PlanningLayout,
    lump: np.ndarray,
    duals: _Duals,
    big_m: float,
) -> Tuple[np.ndarray, np.ndarray]:
    n_e = layout.n_envelopes
    keys = layout.envelope_keys
    binary = lump[layout.envelope_lump]
    positions = np.arange(n_e)
    envelopes = []
    for side, mu in (('max', duals.mu_max), ('min', duals.mu_min)):
        y = spec.add_variables(f'y_{side}', n_e, lb=0.0, ub=big_m)
        mu_var = mu[keys[:, 0], keys[:, 2]]
        spec.add_constraints(
            f'envelope_{side}_on', np.tile(positions, 2), np.concatenate([y, binary]),
            np.concatenate([np.ones(n_e), np.full(n_e, -big_m)]), Relation.LE, np.zeros(n_e))
        spec.add_constraints(
            f'envelope_{side}_below', np.tile(positions, 2), np.concatenate([y, mu_var]),
            np.concatenate([np.ones(n_e), -np.ones(n_e)]), Relation.LE, np.zeros(n_e))
        spec.add_constraints(
            f'envelope_{side}_off', np.tile(positions, 3), np.concatenate([mu_var, y, binary]),
            np.concatenate([np.ones(n_e), -np.ones(n_e), np.full(n_e, big_m)]),
            Relation.LE, np.full(n_e, big_m))
        envelopes.append(y)
    return envelopes[0], envelopes[1]


def _add_strong_duality(
    spec: ModelSpec,
    index: CaseIndex,
    layout: PlanningLayout,
    market: MarketBlocks,
    duals: _Duals,
    y_max: np.ndarray,
    y_min: np.ndarray,
) -> None:
    """Primal welfare equals the dual objective, slice by slice."""
    n_s, n_b, n_l = index.n_slices, index.n_nodes, index.n_lines
    bids = market.bid_index
    local = market.bid_local_slice
    sign = np.where(index.bid_is_generator[bids], -1.0, 1.0)
    s_lines = np.repeat(np.arange(n_s), n_l)
    s_nodes = np.repeat(np.arange(n_s), n_b - 1)
    cap = np.tile(index.existing_capacity, n_s)
    theta_max = np.tile(index.theta_max[1:], n_s)
    env_slice = layout.envelope_keys[:, 0]
    env_mw = layout.lump_mw[layout.envelope_lump]

    spec.add_constraints(
        'strong_duality',
        rows=np.concatenate([
            local, local, local, s_lines, s_lines, env_slice, env_slice, s_nodes, s_nodes]),
        cols=np.concatenate([
            market.q, duals.phi_max, duals.phi_min,
            duals.mu_max.ravel(), duals.mu_min.ravel(),
            y_max, y_min,
            duals.xi_max.ravel(), duals.xi_min.ravel(),
        ]),
        vals=np.concatenate([
            sign * index.bid_price[bids],
            -index.bid_q_max[bids],
            index.bid_q_min[bids],
            -cap, -cap,
            -env_mw, -env_mw,
            -theta_max, -theta_max,
        ]),
        relation=Relation.EQ,
        rhs=np.zeros(n_s),
    )


def _add_fee(
    spec: ModelSpec,
    case: CaseStudy,
    index: CaseIndex,
    market: MarketBlocks,
    duals: _Duals,
    kappa: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Hourly participant surplus per year and the incentive fee recursion."""
    years = case.years
    n_y = len(years)
    bids = market.bid_index
    bid_year = np.array([index.time_slices[k][0] for k in index.bid_slice[bids]], dtype=int)

    surplus = spec.add_variables('surplus', n_y, lb=-np.inf)
    spec.add_constraints(
        'surplus_def',
        rows=np.concatenate([np.arange(n_y), bid_year - 1, bid_year - 1]),
        cols=np.concatenate([surplus, duals.phi_max, duals.phi_min]),
        vals=np.concatenate([np.ones(n_y), -index.bid_q_max[bids], index.bid_q_min[bids]]),
        relation=Relation.EQ,
        rhs=np.zeros(n_y),
    )

    first = np.array([t == 1 for t in years])
    fee = spec.add_variables(
        'fee', n_y, lb=np.where(first, 0.0, -np.inf), ub=np.where(first, 0.0, np.inf))
    step = kappa * case.horizon.psi
    later = np.arange(n_y - 1)
    spec.add_constraints(
        'fee_recursion',
        rows=np.tile(later, 4),
        cols=np.concatenate([fee[1:], fee[:-1], surplus[1:], surplus[:-1]]),
        vals=np.concatenate([
            np.ones(n_y - 1), -np.ones(n_y - 1), np.full(n_y - 1, -step), np.full(n_y - 1, step)]),
        relation=Relation.EQ,
        rhs=np.zeros(n_y - 1),
    )
    return surplus, fee


def _set_objective(
    spec: ModelSpec,
    case: CaseStudy,
    index: CaseIndex,
    layout: PlanningLayout,
    market: MarketBlocks,
    duals: _Duals,
    fee: np.ndarray,
    lump: np.ndarray,
    build: np.ndarray,
) -> None:
    psi = case.horizon.psi
    discount = np.array([case.horizon.discount(t) for t in case.years])
    bids = market.bid_index
    bid_year = np.array([index.time_slices[k][0] for k in index.bid_slice[bids]], dtype=int)
    weight = psi * discount[bid_year - 1]
    sign = np.where(index.bid_is_generator[bids], -1.0, 1.0)

    # Merchandising surplus through the price-quantity identities
    spec.add_objective_terms((market.q, weight * sign * index.bid_price[bids]))
    spec.add_objective_terms((duals.phi_max, -weight * index.bid_q_max[bids]))
    spec.add_objective_terms((duals.phi_min, weight * index.bid_q_min[bids]))
    spec.add_objective_terms((fee, discount))

    fixed = np.array([line.fixed_cost for line in case.lines])
    variable = np.array([line.variable_cost for line in case.lines])
    keys = layout.lump_keys
    spec.add_objective_terms(
        (build.ravel(), (-psi * discount[:, np.newaxis] * fixed[np.newaxis, :]).ravel()))
    spec.add_objective_terms((
        lump, -psi * discount[keys[:, 0] - 1] * variable[keys[:, 1]] * layout.lump_mw))
    spec.sense = Sense.MAXIMIZE


def plan_values(
    case: CaseStudy, layout: PlanningLayout, plan: ExpansionPlan
) -> Tuple[np.ndarray, np.ndarray]:
    """Binary values encoding a plan: ``(b_lump, u)`` in model order."""
    index_of = {line.id: pos for pos, line in enumerate(case.lines)}
    lump = np.zeros(layout.n_lumps)
    build = np.zeros((len(case.years), len(case.lines)))
    for s in plan.selections:
        pos = index_of[s.line]
        lump[layout.lump_position[(s.year, pos, s.lump)]] = 1.0
        build[s.year - 1, pos] = 1.0
    return lump, build.ravel()


def assemble_milp(
    case: CaseStudy,
    kappa: Optional[float] = None,
    fixed_plan: Optional[ExpansionPlan] = None,
    check_big_m: bool = True,
) -> ModelHandle:
    """Assemble the single-level planning model.

    Args:
        case: Case study; ``case.policy`` supplies the default kappa and M.
        kappa: Share of the surplus increase paid to the Transco.
        fixed_plan: Fix every binary to this plan. The result is an LP that
            picks the market outcome most favorable to the Transco among
            all optimal ones.
        check_big_m: Refuse an M below the largest bid price.

    Returns:
        Handle maximizing discounted Transco profit.

    Raises:
        ReformulationError: If kappa lies outside [0, 1].
        BigMError: If M is below the largest bid price.
        InvalidPlanError: If ``fixed_plan`` does not fit the case.
    """
    kappa = case.policy.kappa if kappa is None else float(kappa)
    if not 0.0 <= kappa <= 1.0:
        raise ReformulationError(f"kappa must lie in [0, 1], got {kappa}")
    big_m = case.policy.big_m
    if check_big_m and max_bid_price(case) > big_m:
        raise BigMError(
            f"Big-M {big_m:g} is below the largest bid price {max_bid_price(case):g}")
    if fixed_plan is not None:
        fixed_plan.validate_for(case)

    index = build_index(case)
    layout = planning_layout(case, index)
    spec = ModelSpec(f"planning[kappa={kappa:g}]")

    market = add_market_primal(spec, case, index, range(index.n_slices), with_objective=False)
    lump, build = _add_investment(spec, case, index, layout)
    _add_flow_limits(spec, index, layout, market, lump)
    duals = _add_market_duals(spec, case, index, market)
    y_max, y_min = _add_envelopes(spec, layout, lump, duals, big_m)
    _add_strong_duality(spec, index, layout, market, duals, y_max, y_min)
    _, fee = _add_fee(spec, case, index, market, duals, kappa)
    _set_objective(spec, case, index, layout, market, duals, fee, lump, build)

    handle = build_model(spec)
    if fixed_plan is not None:
        lump_values, build_values = plan_values(case, layout, fixed_plan)
        handle = fix_variables(
            handle,
            np.concatenate([lump, build.ravel()]),
            np.concatenate([lump_values, build_values]),
            name=f"{spec.name}[{fixed_plan.describe(case)}]",
        )
    logger.info(
        f"Planning model for kappa={kappa:g}: {layout.n_lumps} lump binaries, "
        f"{layout.n_envelopes} envelope pairs, M={big_m:g}")
    return handle
