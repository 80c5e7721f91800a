"""Solver settings with CLI, environment and default precedence."""

import logging
import os
from dataclasses import dataclass, replace
from typing import Any, Mapping, Optional

from dotenv import load_dotenv

from .exceptions import BackendUnavailableError

logger = logging.getLogger(__name__)

# Defaults
DEFAULT_BACKEND: str = 'scipy'
DEFAULT_MIP_GAP: float = 1e-6
DEFAULT_LP_TOL: float = 1e-8
DEFAULT_TIME_LIMIT_S: Optional[float] = None
DEFAULT_PYOMO_SOLVER: str = 'appsi_highs'

# Internal LP optimality check
KKT_TOLERANCE: float = 1e-6

# Environment variables
ENV_SOLVER: str = 'GRIDREG_SOLVER'
ENV_MIP_GAP: str = 'GRIDREG_MIP_GAP'
ENV_LP_TOL: str = 'GRIDREG_LP_TOL'
ENV_TIME_LIMIT_S: str = 'GRIDREG_TIME_LIMIT_S'
ENV_PYOMO_SOLVER: str = 'GRIDREG_PYOMO_SOLVER'

KNOWN_BACKENDS = ('scipy', 'pyomo')


@dataclass(frozen=True)
class SolverSettings:
    """Backend choice and tolerances, keyed as ``solver.<field>``."""
    backend: str = DEFAULT_BACKEND
    mip_gap: float = DEFAULT_MIP_GAP
    lp_tol: float = DEFAULT_LP_TOL
    time_limit_s: Optional[float] = DEFAULT_TIME_LIMIT_S
    pyomo_solver: str = DEFAULT_PYOMO_SOLVER

    def __post_init__(self) -> None:
        if self.backend not in KNOWN_BACKENDS:
            raise BackendUnavailableError(
                f"Unknown solver backend '{self.backend}'; valid: {', '.join(KNOWN_BACKENDS)}")
        if self.mip_gap < 0 or self.lp_tol <= 0:
            raise ValueError('solver tolerances must be positive')
        if self.time_limit_s is not None and self.time_limit_s <= 0:
            raise ValueError('solver.time_limit_s must be positive')

    def with_overrides(self, **changes: Any) -> 'SolverSettings':
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _env_float(name: str) -> Optional[float]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return None
    try:
        return float(raw)
    except ValueError:
        logger.warning(f"Ignoring non-numeric {name}={raw!r}")
        return None


def resolve_settings(overrides: Optional[Mapping[str, Any]] = None) -> SolverSettings:
    """Resolve solver settings.

    Precedence is explicit override > environment (``.env`` included) >
    default. Override keys may be dotted (``solver.mip_gap``) or bare.

    Args:
        overrides: Values given on the command line; None entries are ignored.

    Returns:
        Resolved settings.
    """
    load_dotenv()
    values = {
        'backend': os.getenv(ENV_SOLVER) or None,
        'mip_gap': _env_float(ENV_MIP_GAP),
        'lp_tol': _env_float(ENV_LP_TOL),
        'time_limit_s': _env_float(ENV_TIME_LIMIT_S),
        'pyomo_solver': os.getenv(ENV_PYOMO_SOLVER) or None,
    }
    for key, value in (overrides or {}).items():
        name = key.split('.', 1)[1] if key.startswith('solver.') else key
        if name not in values:
            raise ValueError(f"Unknown solver setting '{key}'")
        if value is not None:
            values[name] = value

    settings = SolverSettings().with_overrides(**values)
    logger.debug(f"Resolved solver settings: {settings}")
    return settings
