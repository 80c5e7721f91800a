"""Custom exceptions for kappa sweeps and reports."""


class AnalysisError(Exception):
    """Base exception for sweep analysis."""
    pass


class InvalidGridError(AnalysisError):
    """Raised when a kappa grid is malformed or leaves [0, 1]."""
    pass


class EmptySweepError(AnalysisError):
    """Raised when a sweep table has no usable rows."""
    pass


class ReportError(AnalysisError):
    """Raised when report files cannot be written."""
    pass
