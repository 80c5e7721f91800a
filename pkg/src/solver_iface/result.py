"""Solve results and the internal LP optimality check."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .config import KKT_TOLERANCE
from .model import ModelHandle, Sense

logger = logging.getLogger(__name__)


class SolveStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'
    LIMIT = 'limit'


@dataclass(frozen=True)
class KKTResiduals:
    """Scaled-free residuals of an LP solution; compare against ``tol * scale``."""
    primal: float
    dual: float
    complementarity: float
    scale: float
    tol: float

    @property
    def passed(self) -> bool:
        bound = self.tol * self.scale
        return max(self.primal, self.dual, self.complementarity) <= bound


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one solve.

    ``duals`` are shadow prices: the change of the model's own objective
    per unit increase of each row's right-hand side. They are present only
    for optimal solves of models without binaries.
    """
    status: SolveStatus
    backend: str
    x: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None
    objective: Optional[float] = None
    gap: Optional[float] = None
    wall_time: float = 0.0
    message: str = ''
    kkt: Optional[KKTResiduals] = None

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    @property
    def has_solution(self) -> bool:
        return self.x is not None

    def values(self, handle: ModelHandle, block: str) -> np.ndarray:
        if self.x is None:
            raise ValueError(f"No primal solution ({self.status.value})")
        return self.x[handle.var_block(block)]

    def row_duals(self, handle: ModelHandle, block: str) -> np.ndarray:
        if self.duals is None:
            raise ValueError('No duals available for this result')
        return self.duals[handle.row_block(block)]


def check_lp_optimality(
    handle: ModelHandle, result: SolveResult, tol: float = KKT_TOLERANCE
) -> KKTResiduals:
    """Check primal feasibility, dual feasibility and complementarity.

    Uses the shadow-price convention of ``SolveResult.duals``: for a
    maximization, ``<=`` rows carry nonnegative duals and ``>=`` rows
    nonpositive ones (reversed when minimizing); reduced costs
    ``c - A^T y`` must point into active bounds.

    Args:
        handle: The LP that was solved.
        result: Optimal result with primal and dual values.
        tol: Relative tolerance, scaled by ``1 + max |coefficient|``.

    Returns:
        Residuals; ``passed`` tells whether all are within tolerance.
    """
    if result.x is None or result.duals is None:
        raise ValueError('check_lp_optimality needs primal and dual values')

    x, y = result.x, result.duals
    a = handle.matrix
    sgn = 1.0 if handle.sense is Sense.MAXIMIZE else -1.0
    coefficients = np.concatenate([
        np.abs(a.data), np.abs(handle.objective), np.abs(handle.rhs), [0.0]])
    scale = 1.0 + float(coefficients.max())

    activity = a @ x
    le, eq, ge = handle.relations < 0, handle.relations == 0, handle.relations > 0
    row_violation = np.concatenate([
        np.maximum(activity[le] - handle.rhs[le], 0.0),
        np.abs(activity[eq] - handle.rhs[eq]),
        np.maximum(handle.rhs[ge] - activity[ge], 0.0),
        np.maximum(handle.lb - x, 0.0),
        np.maximum(x - handle.ub, 0.0),
        [0.0],
    ])

    reduced = sgn * (handle.objective - a.T @ y)
    has_lb, has_ub = np.isfinite(handle.lb), np.isfinite(handle.ub)
    dual_violation = np.concatenate([
        np.where(has_ub, 0.0, np.maximum(reduced, 0.0)),
        np.where(has_lb, 0.0, np.maximum(-reduced, 0.0)),
        np.maximum(-sgn * y[le], 0.0),
        np.maximum(sgn * y[ge], 0.0),
        [0.0],
    ])

    slack = handle.rhs - activity
    gap_ub = np.where(has_ub, handle.ub - x, 0.0)
    gap_lb = np.where(has_lb, x - handle.lb, 0.0)
    complementarity = np.concatenate([
        np.abs(y[le] * slack[le]),
        np.abs(y[ge] * slack[ge]),
        np.maximum(reduced, 0.0) * np.abs(gap_ub),
        np.maximum(-reduced, 0.0) * np.abs(gap_lb),
        [0.0],
    ])

    residuals = KKTResiduals(
        primal=float(row_violation.max()),
        dual=float(dual_violation.max()),
        complementarity=float(complementarity.max()),
        scale=scale,
        tol=tol,
    )
    if not residuals.passed:
        logger.warning(f"LP optimality check failed for '{handle.name}': {residuals}")
    return residuals
