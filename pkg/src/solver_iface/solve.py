"""Single entry point for solving a model with the configured backend."""

import logging
import time
from dataclasses import replace
from typing import Optional

from .backends import get_backend
from .config import KKT_TOLERANCE, SolverSettings, resolve_settings
from .model import ModelHandle
from .result import SolveResult, check_lp_optimality

logger = logging.getLogger(__name__)


def optimize(
    handle: ModelHandle,
    settings: Optional[SolverSettings] = None,
    check: bool = True,
) -> SolveResult:
    """Solve a model.

    Args:
        handle: Model built by ``build_model``.
        settings: Backend and tolerances; resolved from the environment
            when omitted.
        check: Run the internal optimality check on optimal LP results.

    Returns:
        Result with wall time filled in; optimal LP results carry duals
        and, when checked, their KKT residuals.

    Raises:
        BackendError: If the backend fails outright.
        BackendUnavailableError: If the backend cannot be used.
    """
    settings = settings or resolve_settings()
    backend = get_backend(settings)

    start = time.perf_counter()
    result = backend.solve(handle)
    wall_time = time.perf_counter() - start
    result = replace(result, wall_time=wall_time)

    if check and result.is_optimal and result.duals is not None:
        result = replace(result, kkt=check_lp_optimality(handle, result, KKT_TOLERANCE))

    gap = f"{result.gap:.2e}" if result.gap is not None else 'n/a'
    logger.info(
        f"Solved '{handle.name}' with {backend.name}: status={result.status.value}, "
        f"objective={result.objective}, gap={gap}, time={wall_time:.3f}s")
    return result
