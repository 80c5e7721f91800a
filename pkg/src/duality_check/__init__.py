"""Optimality certificates for the market clearing LP."""

from .certificate import (
    DEFAULT_TOLERANCE,
    DualCertificate,
    certify,
    complementarity,
    dual_feasibility,
    dual_objective,
    linearization_residual,
    primal_objective,
    strong_duality_gap,
)
from .exceptions import CertificateError, MissingDualsError

__version__ = "1.0.0"
__all__ = [
    "DEFAULT_TOLERANCE",
    "DualCertificate",
    "certify",
    "complementarity",
    "dual_feasibility",
    "dual_objective",
    "linearization_residual",
    "primal_objective",
    "strong_duality_gap",
    "CertificateError",
    "MissingDualsError",
]
