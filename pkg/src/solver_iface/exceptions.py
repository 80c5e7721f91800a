"""Custom exceptions for model building and solver backends."""

from typing import Optional


class SolverError(Exception):
    """Base exception for solver interface operations."""
    pass


class ModelSpecError(SolverError):
    """Raised when a model specification is inconsistent."""
    pass


class BackendError(SolverError):
    """Raised when a backend fails; keeps the backend's own message.

    Attributes:
        backend: Name of the failing backend.
    """

    def __init__(self, message: str, backend: Optional[str] = None) -> None:
        super().__init__(f"[{backend}] {message}" if backend else message)
        self.backend = backend


class BackendUnavailableError(SolverError):
    """Raised when a backend is unknown or its solver is not installed."""
    pass
