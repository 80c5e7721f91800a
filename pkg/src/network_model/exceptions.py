"""Custom exceptions for case data handling."""

from typing import Optional


class CaseError(Exception):
    """Base exception for case study operations."""
    pass


class CaseParseError(CaseError):
    """Raised when a case file cannot be parsed."""
    pass


class CaseValidationError(CaseError):
    """Raised when case data breaks an invariant.

    Attributes:
        field: Dotted path of the offending field, e.g. ``bids.3`` or
            ``policy.kappa``.
    """

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        super().__init__(message)
        self.field = field


class CaseIOError(CaseError):
    """Raised when a case file cannot be read or written."""
    pass
