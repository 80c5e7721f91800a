"""Custom exceptions for market clearing."""


class MarketError(Exception):
    """Base exception for market clearing operations."""
    pass


class InvalidPlanError(MarketError):
    """Raised when an expansion plan is invalid for a case."""
    pass
