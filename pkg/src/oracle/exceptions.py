"""Custom exceptions for the brute-force oracle."""

from typing import Optional


class OracleError(Exception):
    """Base exception for brute-force enumeration."""
    pass


class EnumerationBudgetError(OracleError):
    """Raised when the plan space exceeds the enumeration budget.

    Attributes:
        count: Number of plans the request would enumerate.
        budget: Configured limit.
    """

    def __init__(self, message: str, count: int, budget: int) -> None:
        super().__init__(message)
        self.count = count
        self.budget = budget


class OracleSolveError(OracleError):
    """Raised when the market cannot be cleared for an enumerated plan."""

    def __init__(self, message: str, plan: Optional[object] = None) -> None:
        super().__init__(message)
        self.plan = plan
