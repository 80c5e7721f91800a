"""Kappa sweeps over the planning model."""

import asyncio
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.milp_reform import (
    BigMError,
    CertificationFailure,
    PlanningInfeasibleError,
    ReformulationError,
    solve_planning,
)
from src.network_model import CaseStudy
from src.solver_iface import SolverError, SolverSettings

from .config import DEFAULT_PARALLELISM, GRID_TOLERANCE
from .exceptions import AnalysisError, EmptySweepError, InvalidGridError
from .metrics import MetricsRow, evaluate_metrics

logger = logging.getLogger(__name__)

# Failure statuses, most specific first
_FAILURE_STATUS: Tuple[Tuple[type, str], ...] = (
    (CertificationFailure, 'certificate_failed'),
    (PlanningInfeasibleError, 'infeasible'),
    (BigMError, 'big_m_error'),
    (ReformulationError, 'model_error'),
    (SolverError, 'solver_error'),
    (AnalysisError, 'identity_failed'),
)


def failure_status(error: BaseException) -> str:
    for kind, status in _FAILURE_STATUS:
        if isinstance(error, kind):
            return status
    return 'error'


@dataclass(frozen=True)
class SweepTable:
    """One metrics row per grid kappa, in increasing kappa order."""
    rows: Tuple[MetricsRow, ...]
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def kappas(self) -> Tuple[float, ...]:
        return tuple(row.kappa for row in self.rows)

    @property
    def ok_rows(self) -> Tuple[MetricsRow, ...]:
        return tuple(row for row in self.rows if row.ok)

    @property
    def failed_rows(self) -> Tuple[MetricsRow, ...]:
        return tuple(row for row in self.rows if not row.ok)

    def row_at(self, kappa: float) -> Optional[MetricsRow]:
        for row in self.rows:
            if abs(row.kappa - kappa) <= GRID_TOLERANCE:
                return row
        return None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_record() for row in self.rows])


class SweepProgressTracker:
    """Counts finished kappas and logs progress with an ETA."""

    def __init__(self, total: int, logger: logging.Logger = logger):
        self.total = total
        self.processed = 0
        self.successful = 0
        self.failed = 0
        self.start_time = time.time()
        self.logger = logger

    def update_progress(self, success: bool = True) -> None:
        self.processed += 1
        if success:
            self.successful += 1
        else:
            self.failed += 1

    def progress_message(self, current: str = "") -> str:
        elapsed = time.time() - self.start_time
        eta = elapsed / self.processed * (self.total - self.processed) if self.processed else 0.0
        percent = self.processed / self.total * 100 if self.total > 0 else 0.0
        message = (
            f"Progress: {self.processed}/{self.total} ({percent:.1f}%) | "
            f"Success: {self.successful} | "
            f"Failed: {self.failed} | "
            f"ETA: {eta:.1f}s"
        )
        if current:
            message += f" | Current: {current}"
        return message

    def display_progress(self, current: str = "") -> None:
        self.logger.info(self.progress_message(current))

    @property
    def elapsed(self) -> float:
        return time.time() - self.start_time


def validate_grid(grid: Iterable[float]) -> Tuple[float, ...]:
    """Check a kappa grid is nonempty, inside [0, 1] and strictly increasing.

    Raises:
        InvalidGridError: Otherwise.
    """
    values = tuple(float(kappa) for kappa in grid)
    if not values:
        raise InvalidGridError('kappa grid is empty')
    for kappa in values:
        if not math.isfinite(kappa) or kappa < 0.0 or kappa > 1.0:
            raise InvalidGridError(f'kappa {kappa:g} lies outside [0, 1]')
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidGridError('kappa grid must be strictly increasing')
    return values


def parse_grid(text: str) -> Tuple[float, ...]:
    """Parse ``lo:hi:step``, a comma list or a single kappa.

    ``lo:hi:step`` includes ``hi`` when it lies on the step lattice; points are
    rounded to 10 decimals so repeated parses give identical floats.

    Raises:
        InvalidGridError: If the text is malformed or the grid is invalid.
    """
    text = text.strip()
    try:
        if ':' in text:
            parts = [float(part) for part in text.split(':')]
            if len(parts) != 3:
                raise InvalidGridError(f"grid '{text}' must read lo:hi:step")
            lo, hi, step = parts
            if step <= 0:
                raise InvalidGridError(f"grid step must be positive, got {step:g}")
            if hi < lo:
                raise InvalidGridError(f"grid '{text}' has hi below lo")
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            values = np.round(lo + step * np.arange(count), 10)
            grid = [float(v) for v in values]
        else:
            grid = [float(part) for part in text.split(',') if part.strip()]
    except ValueError as e:
        raise InvalidGridError(f"grid '{text}' is not numeric: {e}") from e
    return validate_grid(grid)


def evaluate_kappa(
    case: CaseStudy,
    kappa: float,
    settings: Optional[SolverSettings] = None,
    check_big_m: bool = True,
) -> MetricsRow:
    """Solve and evaluate one kappa; failures come back as a failed row."""
    try:
        solution = solve_planning(case, kappa, settings, check_big_m=check_big_m)
        row = evaluate_metrics(solution, case)
    except (ReformulationError, SolverError, AnalysisError) as e:
        status = failure_status(e)
        logger.error(f"kappa={kappa:g} failed ({status}): {e}")
        return MetricsRow.failed(kappa, status, str(e))
    logger.info(
        f"kappa={kappa:g}: TP={row.transco_profit:.6g} SW={row.social_welfare:.6g} "
        f"benefits={row.participant_benefits:.6g} gap={row.gap} wall={row.wall_time:.2f}s")
    return row


async def sweep_kappa_async(
    case: CaseStudy,
    grid: Sequence[float],
    parallelism: int = DEFAULT_PARALLELISM,
    settings: Optional[SolverSettings] = None,
    check_big_m: bool = True,
    tracker: Optional[SweepProgressTracker] = None,
) -> SweepTable:
    """Solve every grid kappa with at most ``parallelism`` solves in flight.

    Args:
        case: Case study.
        grid: Kappa values, strictly increasing inside [0, 1].
        parallelism: Concurrent solves, each on a worker thread.
        settings: Solver settings.
        check_big_m: Refuse cases with a bid above the big-M constant.
        tracker: Progress tracker; one is created when omitted.

    Returns:
        Table with one row per kappa in grid order; failed solves keep their
        status instead of being dropped.

    Raises:
        InvalidGridError: If the grid is invalid.
    """
    kappas = validate_grid(grid)
    tracker = tracker or SweepProgressTracker(len(kappas))
    semaphore = asyncio.Semaphore(max(1, parallelism))

    async def evaluate_with_semaphore(kappa: float) -> MetricsRow:
        async with semaphore:
            row = await asyncio.to_thread(evaluate_kappa, case, kappa, settings, check_big_m)
            tracker.update_progress(success=row.ok)
            tracker.display_progress(f"kappa={kappa:g}")
            return row

    logger.info(f"Sweeping {len(kappas)} kappa values with parallelism {parallelism}")
    results = await asyncio.gather(
        *(evaluate_with_semaphore(kappa) for kappa in kappas), return_exceptions=True)

    rows: List[MetricsRow] = []
    for kappa, result in zip(kappas, results):
        if isinstance(result, BaseException):
            logger.error(f"kappa={kappa:g} raised {type(result).__name__}: {result}")
            rows.append(MetricsRow.failed(kappa, failure_status(result), str(result)))
        else:
            rows.append(result)

    table = SweepTable(
        rows=tuple(rows),
        provenance={
            **case.provenance.model_dump(mode='json'),
            'backend': settings.backend if settings else None,
            'grid': list(kappas),
        },
    )
    if table.failed_rows:
        logger.warning(
            f"{len(table.failed_rows)} of {len(rows)} kappa values failed: "
            + ', '.join(f"{row.kappa:g} ({row.status})" for row in table.failed_rows))
    return table


def sweep_kappa(
    case: CaseStudy,
    grid: Sequence[float],
    parallelism: int = DEFAULT_PARALLELISM,
    settings: Optional[SolverSettings] = None,
    check_big_m: bool = True,
) -> SweepTable:
    """Blocking wrapper around :func:`sweep_kappa_async`."""
    return asyncio.run(sweep_kappa_async(case, grid, parallelism, settings, check_big_m))


def participant_optimal_kappa(table: SweepTable, tol: float = 1e-9) -> Tuple[float, MetricsRow]:
    """Kappa maximizing participant benefits; ties go to the smallest kappa.

    Raises:
        EmptySweepError: If the table has no successful rows.
    """
    rows = table.ok_rows
    if not rows:
        raise EmptySweepError('sweep table has no successful rows')
    best = max(row.participant_benefits for row in rows)
    threshold = best - tol * (1.0 + abs(best))
    row = min((r for r in rows if r.participant_benefits >= threshold), key=lambda r: r.kappa)
    return row.kappa, row


def summary_rows(table: SweepTable) -> List[Tuple[str, MetricsRow]]:
    """The kappa=1, kappa*, kappa=0 rows, labelled; missing endpoints are skipped.

    Raises:
        EmptySweepError: If the table has no successful rows.
    """
    kappa_star, star_row = participant_optimal_kappa(table)
    summary: List[Tuple[str, MetricsRow]] = []
    for label, kappa in (('kappa=1', 1.0), ('kappa*', kappa_star), ('kappa=0', 0.0)):
        row = star_row if label == 'kappa*' else table.row_at(kappa)
        if row is None or not row.ok:
            logger.warning(f"Summary row {label} is not available in the sweep")
            continue
        summary.append((label, row))
    return summary
