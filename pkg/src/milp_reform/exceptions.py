"""Custom exceptions for the single-level planning model."""

from typing import Dict, Optional


class ReformulationError(Exception):
    """Base exception for planning model assembly and solution."""
    pass


class BigMError(ReformulationError):
    """Raised when the big-M constant is below the largest bid price."""
    pass


class PlanningInfeasibleError(ReformulationError):
    """Raised when the planning model has no feasible solution.

    The empty plan is always feasible for a well-formed case, so this
    points at inconsistent data or an undersized big-M.
    """
    pass


class CertificationFailure(ReformulationError):
    """Raised when values recomputed from the primal disagree with the model.

    Attributes:
        residuals: Scaled residuals that exceeded the tolerance.
    """

    def __init__(self, message: str, residuals: Optional[Dict[str, float]] = None) -> None:
        super().__init__(message)
        self.residuals = residuals or {}
