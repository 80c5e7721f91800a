"""Optimality certificates for market outcomes.

Every check is a pure function of (outcome, case, plan) and returns an
absolute residual; ``certify`` bundles them with the scale
``1 + |primal objective|`` against which they are judged.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from src.lp_market import ExpansionPlan, MarketOutcome, slice_capacity
from src.network_model import CaseIndex, CaseStudy, build_index

from .exceptions import MissingDualsError

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE: float = 1e-5


@dataclass(frozen=True)
class DualCertificate:
    """Residuals of one outcome; all are absolute and nonnegative."""
    dual_feasibility_residual: float
    strong_duality_gap: float
    complementarity_residual: float
    linearization_residual: float
    scale: float
    tol: float = DEFAULT_TOLERANCE

    @property
    def worst_scaled(self) -> float:
        return max(
            self.dual_feasibility_residual,
            self.strong_duality_gap,
            self.complementarity_residual,
            self.linearization_residual,
        ) / self.scale

    @property
    def passed(self) -> bool:
        return self.worst_scaled <= self.tol

    def to_dict(self) -> Dict[str, float]:
        return {
            'dual_feasibility': self.dual_feasibility_residual,
            'strong_duality_gap': self.strong_duality_gap,
            'complementarity': self.complementarity_residual,
            'linearization': self.linearization_residual,
            'scale': self.scale,
            'pass': self.passed,
        }


def _require_duals(outcome: MarketOutcome) -> None:
    if not outcome.is_optimal:
        raise MissingDualsError(f"Outcome status is {outcome.status.value}; no duals to check")
    for name in ('prices', 'phi_max', 'phi_min', 'gamma', 'mu_max', 'mu_min'):
        if np.isnan(getattr(outcome, name)).any():
            raise MissingDualsError(f"Outcome has missing '{name}' values")


def _angle_sensitivity(outcome: MarketOutcome, case: CaseStudy, index: CaseIndex) -> np.ndarray:
    """Slices x nodes array of ``base_mva * sum_l B_l (S_lb - R_lb) gamma_l``."""
    weighted = case.base_mva * outcome.gamma * index.susceptance[np.newaxis, :]
    return weighted @ index.incidence().T


def _reference_dual(outcome: MarketOutcome, sensitivity: np.ndarray) -> np.ndarray:
    """Reference-angle dual, recovered from its stationarity row when absent."""
    if np.isnan(outcome.chi).any():
        return sensitivity[:, 0]
    return outcome.chi


def _nonnegativity(outcome: MarketOutcome) -> float:
    arrays = (outcome.phi_max, outcome.phi_min, outcome.mu_max, outcome.mu_min,
              outcome.xi_max, outcome.xi_min)
    return max(float(np.maximum(-a, 0.0).max(initial=0.0)) for a in arrays)


def dual_feasibility(
    outcome: MarketOutcome, case: CaseStudy, plan: Optional[ExpansionPlan] = None
) -> float:
    """Largest violation of the dual constraints of the market LP.

    Covers the generator and consumer stationarity rows, flow and angle
    stationarity, the reference-node row and sign restrictions on the
    bound duals.

    Raises:
        MissingDualsError: If the outcome has no duals.
    """
    _require_duals(outcome)
    index = build_index(case)
    nodal = outcome.prices[index.bid_slice, index.bid_node]
    gen = index.bid_is_generator
    price = index.bid_price
    bid_rows = np.where(
        gen,
        -nodal + outcome.phi_max - outcome.phi_min + price,
        nodal + outcome.phi_max - outcome.phi_min - price,
    )
    flow_rows = (outcome.prices[:, index.line_from] - outcome.prices[:, index.line_to]
                 + outcome.gamma + outcome.mu_max - outcome.mu_min)
    sensitivity = _angle_sensitivity(outcome, case, index)
    angle_rows = -sensitivity[:, 1:] + outcome.xi_max[:, 1:] - outcome.xi_min[:, 1:]
    reference_rows = -sensitivity[:, 0] + _reference_dual(outcome, sensitivity)

    return max(
        float(np.abs(bid_rows).max(initial=0.0)),
        float(np.abs(flow_rows).max(initial=0.0)),
        float(np.abs(angle_rows).max(initial=0.0)),
        float(np.abs(reference_rows).max(initial=0.0)),
        _nonnegativity(outcome),
    )


def primal_objective(outcome: MarketOutcome, case: CaseStudy) -> float:
    """Hourly welfare summed over slices, from the dispatch."""
    index = build_index(case)
    signed = np.where(index.bid_is_generator, -1.0, 1.0) * index.bid_price
    return float(signed @ outcome.dispatch)


def dual_objective(
    outcome: MarketOutcome, case: CaseStudy, plan: Optional[ExpansionPlan] = None
) -> float:
    """Dual objective: bound terms, flow-limit terms (existing plus expansion) and angle terms."""
    plan = plan if plan is not None else outcome.plan
    index = build_index(case)
    capacity = slice_capacity(case, index, plan)
    bounds = outcome.phi_max @ index.bid_q_max - outcome.phi_min @ index.bid_q_min
    flows = float((capacity * (outcome.mu_max + outcome.mu_min)).sum())
    angles = float(((outcome.xi_max + outcome.xi_min) * index.theta_max[np.newaxis, :]).sum())
    return float(bounds) + flows + angles


def strong_duality_gap(
    outcome: MarketOutcome, case: CaseStudy, plan: Optional[ExpansionPlan] = None
) -> float:
    """``|primal objective - dual objective|``."""
    _require_duals(outcome)
    return abs(primal_objective(outcome, case) - dual_objective(outcome, case, plan))


def complementarity(
    outcome: MarketOutcome, case: CaseStudy, plan: Optional[ExpansionPlan] = None
) -> float:
    """Largest ``|multiplier * slack|`` over all limit rows."""
    _require_duals(outcome)
    plan = plan if plan is not None else outcome.plan
    index = build_index(case)
    q = outcome.dispatch
    capacity = slice_capacity(case, index, plan)
    theta = outcome.angles[:, 1:]
    theta_max = index.theta_max[np.newaxis, 1:]
    products = (
        outcome.phi_max * (index.bid_q_max - q),
        outcome.phi_min * (q - index.bid_q_min),
        outcome.mu_max * (capacity - outcome.flows),
        outcome.mu_min * (capacity + outcome.flows),
        outcome.xi_max[:, 1:] * (theta_max - theta),
        outcome.xi_min[:, 1:] * (theta_max + theta),
    )
    return max(float(np.abs(p).max(initial=0.0)) for p in products)


def linearization_residual(outcome: MarketOutcome, case: CaseStudy) -> float:
    """Largest error of the price-quantity identities per bid.

    ``pi g = c^g g + phi_max g_max - phi_min g_min`` for generators and
    ``pi d = c^d d - phi_max d_max + phi_min d_min`` for consumers.
    """
    _require_duals(outcome)
    index = build_index(case)
    q = outcome.dispatch
    nodal = outcome.prices[index.bid_slice, index.bid_node]
    bound_terms = outcome.phi_max * index.bid_q_max - outcome.phi_min * index.bid_q_min
    rhs = np.where(
        index.bid_is_generator,
        index.bid_price * q + bound_terms,
        index.bid_price * q - bound_terms,
    )
    return float(np.abs(nodal * q - rhs).max(initial=0.0))


def certify(
    outcome: MarketOutcome,
    case: CaseStudy,
    plan: Optional[ExpansionPlan] = None,
    tol: float = DEFAULT_TOLERANCE,
) -> DualCertificate:
    """Compute every residual of an outcome.

    Args:
        outcome: Optimal market outcome with duals.
        case: Case the outcome belongs to.
        plan: Plan fixing the flow limits; defaults to ``outcome.plan``.
        tol: Threshold on scaled residuals.

    Returns:
        Certificate; ``passed`` is true when every residual divided by
        ``1 + |primal objective|`` is within ``tol``.

    Raises:
        MissingDualsError: If the outcome has no duals.
    """
    plan = plan if plan is not None else outcome.plan
    certificate = DualCertificate(
        dual_feasibility_residual=dual_feasibility(outcome, case, plan),
        strong_duality_gap=strong_duality_gap(outcome, case, plan),
        complementarity_residual=complementarity(outcome, case, plan),
        linearization_residual=linearization_residual(outcome, case),
        scale=1.0 + abs(primal_objective(outcome, case)),
        tol=tol,
    )
    if not certificate.passed:
        logger.error(f"Optimality certificate failed: {certificate.to_dict()}")
    return certificate
