"""Custom exceptions for optimality certificates."""


class CertificateError(Exception):
    """Base exception for certificate computation."""
    pass


class MissingDualsError(CertificateError):
    """Raised when an outcome lacks the duals a certificate needs."""
    pass
