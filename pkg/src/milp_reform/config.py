"""Tolerances for planning solutions and their audits."""

# Binary values above this are read as 1
BINARY_THRESHOLD: float = 0.5

# Relative tolerance for recomputed surpluses, fees and profit
RECOMPUTE_TOLERANCE: float = 1e-5

# Envelope audit: |y - b * mu| <= tol * (1 + M); values within tol * (1 + M) of M sit on the bound
ENVELOPE_TOLERANCE: float = 1e-5
