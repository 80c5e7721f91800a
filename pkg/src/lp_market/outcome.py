"""Market outcomes and the surplus accounting built on them."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
import pandas as pd

from src.network_model import CaseStudy, build_index
from src.solver_iface import SolveStatus

from .plan import ExpansionPlan

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarketOutcome:
    """Primal and dual solution of the market clearing for a fixed plan.

    Bid-aligned arrays follow ``case.bids``. Slice arrays have one row per
    (year, period) in horizon order; node columns follow ``case.nodes`` and
    line columns ``case.lines``. ``xi_*`` are zero at the reference node.

    Attributes:
        dispatch: Cleared quantity per bid (g for generators, d for consumers).
        phi_max / phi_min: Duals of the upper / lower quantity bounds.
        prices: Power-balance duals (nodal prices) per slice and node.
        gamma: Duals of the DC flow definition per slice and line.
        mu_max / mu_min: Duals of the flow limits per slice and line.
        xi_max / xi_min: Duals of the angle limits per slice and node.
        chi: Dual of the reference-angle fixing per slice.
        capacity: Flow limit used per slice and line.
        slice_objective: Hourly welfare per slice.
    """
    plan: ExpansionPlan
    status: SolveStatus
    time_slices: Tuple[Tuple[int, int], ...]
    dispatch: np.ndarray
    phi_max: np.ndarray
    phi_min: np.ndarray
    flows: np.ndarray
    angles: np.ndarray
    prices: np.ndarray
    gamma: np.ndarray
    mu_max: np.ndarray
    mu_min: np.ndarray
    xi_max: np.ndarray
    xi_min: np.ndarray
    chi: np.ndarray
    capacity: np.ndarray
    slice_objective: np.ndarray
    backend: str = ''
    wall_time: float = 0.0
    kkt_passed: bool = True
    metadata: Dict[str, float] = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    @property
    def objective(self) -> float:
        """Total hourly welfare summed over all slices."""
        return float(self.slice_objective.sum())

    def price(self, case: CaseStudy, year: int, period: int, node_id: int) -> float:
        k = self.time_slices.index((year, period))
        return float(self.prices[k, [n.id for n in case.nodes].index(node_id)])

    def flow(self, case: CaseStudy, year: int, period: int, line_id: int) -> float:
        k = self.time_slices.index((year, period))
        return float(self.flows[k, [line.id for line in case.lines].index(line_id)])


@dataclass(frozen=True)
class SurplusReport:
    """Per-year surpluses, per operating hour, with Psi-scaled views.

    Attributes:
        load_surplus: sum of (c^d - pi) * d per year.
        generator_surplus: sum of (pi - c^g) * g per year.
        merchandising_surplus: sum of pi * d - pi * g per year.
    """
    years: Tuple[int, ...]
    psi: float
    load_surplus: Dict[int, float]
    generator_surplus: Dict[int, float]
    merchandising_surplus: Dict[int, float]

    def participant_surplus(self, year: int) -> float:
        return self.load_surplus[year] + self.generator_surplus[year]

    def welfare(self, year: int) -> float:
        return self.participant_surplus(year) + self.merchandising_surplus[year]

    def yearly(self, year: int) -> Dict[str, float]:
        return {
            'load_surplus': self.psi * self.load_surplus[year],
            'generator_surplus': self.psi * self.generator_surplus[year],
            'merchandising_surplus': self.psi * self.merchandising_surplus[year],
        }


def _bid_price_terms(outcome: MarketOutcome, case: CaseStudy):
    index = build_index(case)
    nodal = outcome.prices[index.bid_slice, index.bid_node]
    return index, nodal


def compute_surpluses(outcome: MarketOutcome, case: CaseStudy) -> SurplusReport:
    """Compute load, generator and merchandising surplus per year.

    Args:
        outcome: Optimal market outcome.
        case: Case the outcome was cleared on.

    Returns:
        Hourly surpluses per year.
    """
    index, nodal = _bid_price_terms(outcome, case)
    gen = index.bid_is_generator
    q = outcome.dispatch
    load_terms = np.where(gen, 0.0, (index.bid_price - nodal) * q)
    gen_terms = np.where(gen, (nodal - index.bid_price) * q, 0.0)
    ms_terms = np.where(gen, -nodal * q, nodal * q)

    bid_year = np.array([outcome.time_slices[k][0] for k in index.bid_slice], dtype=int)
    report = SurplusReport(
        years=case.years,
        psi=case.horizon.psi,
        load_surplus={t: float(load_terms[bid_year == t].sum()) for t in case.years},
        generator_surplus={t: float(gen_terms[bid_year == t].sum()) for t in case.years},
        merchandising_surplus={t: float(ms_terms[bid_year == t].sum()) for t in case.years},
    )
    return report


def welfare_per_hour(outcome: MarketOutcome, case: CaseStudy) -> Dict[int, float]:
    """Hourly welfare ``sum c^d d - sum c^g g`` per year."""
    index = build_index(case)
    signed = np.where(index.bid_is_generator, -1.0, 1.0) * index.bid_price * outcome.dispatch
    return {
        t: float(sum(signed[index.bid_slice == k].sum() for k in index.year_slices[t]))
        for t in case.years
    }


def congestion_rent(outcome: MarketOutcome, case: CaseStudy) -> Dict[int, float]:
    """Hourly congestion rent ``sum f * (pi_to - pi_from)`` per year."""
    index = build_index(case)
    spread = outcome.prices[:, index.line_to] - outcome.prices[:, index.line_from]
    per_slice = (outcome.flows * spread).sum(axis=1)
    return {
        t: float(sum(per_slice[k] for k in index.year_slices[t])) for t in case.years
    }


def export_outcome(
    outcome: MarketOutcome, case: CaseStudy, directory: Union[str, Path]
) -> Dict[str, Path]:
    """Write ``prices.csv`` (t,s,b,pi), ``flows.csv`` (t,s,l,f) and ``dispatch.csv``.

    Returns:
        Mapping of table name to written path.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    index = build_index(case)

    prices = pd.DataFrame([
        {'t': t, 's': s, 'b': node_id, 'pi': outcome.prices[k, b]}
        for k, (t, s) in enumerate(outcome.time_slices)
        for b, node_id in enumerate(index.node_ids)
    ], columns=['t', 's', 'b', 'pi'])
    flows = pd.DataFrame([
        {'t': t, 's': s, 'l': line_id, 'f': outcome.flows[k, j]}
        for k, (t, s) in enumerate(outcome.time_slices)
        for j, line_id in enumerate(index.line_ids)
    ], columns=['t', 's', 'l', 'f'])
    dispatch = pd.DataFrame({
        't': [bid.year for bid in case.bids],
        's': [bid.period for bid in case.bids],
        'b': [bid.node for bid in case.bids],
        'kind': [bid.agent_kind.value for bid in case.bids],
        'price': index.bid_price,
        'q': outcome.dispatch,
    })

    paths = {
        'prices': directory / 'prices.csv',
        'flows': directory / 'flows.csv',
        'dispatch': directory / 'dispatch.csv',
    }
    prices.to_csv(paths['prices'], index=False, float_format='%.6g')
    flows.to_csv(paths['flows'], index=False, float_format='%.6g')
    dispatch.to_csv(paths['dispatch'], index=False, float_format='%.6g')
    logger.info(f"Market outcome exported to {directory}")
    return paths
