"""Stakeholder metrics of a planning solution."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from typing_extensions import Self

from src.milp_reform import CertificationFailure, PlanningSolution, recompute_metrics_from_primal
from src.network_model import CaseStudy

from .config import IDENTITY_TOLERANCE
from .exceptions import AnalysisError

logger = logging.getLogger(__name__)

STATUS_OK = 'ok'


@dataclass(frozen=True)
class MetricsRow:
    """Discounted metrics for one kappa.

    A row whose solve failed keeps the kappa and the failure in ``status``
    and ``message``; its metrics are NaN.
    """
    kappa: float
    transco_profit: float = math.nan
    social_welfare: float = math.nan
    participant_benefits: float = math.nan
    fee_total: float = math.nan
    ms_total: float = math.nan
    cost_total: float = math.nan
    change_in_surplus: float = math.nan
    expansion: Dict[int, float] = field(default_factory=dict)
    status: str = STATUS_OK
    message: str = ''
    gap: Optional[float] = None
    wall_time: float = 0.0
    statistics: Dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    @property
    def total_expansion(self) -> float:
        return float(sum(self.expansion.values()))

    @classmethod
    def failed(cls, kappa: float, status: str, message: str) -> Self:
        return cls(kappa=kappa, status=status, message=message)

    def identity_residual(self) -> float:
        """``|SW - TP - benefits| / (1 + |SW|)``."""
        gap = self.social_welfare - self.transco_profit - self.participant_benefits
        return abs(gap) / (1.0 + abs(self.social_welfare))

    def to_record(self) -> Dict[str, Any]:
        record = {
            'kappa': self.kappa,
            'tp': self.transco_profit,
            'sw': self.social_welfare,
            'benefits': self.participant_benefits,
            'fee': self.fee_total,
            'ms': self.ms_total,
            'cost': self.cost_total,
            'change_in_surplus': self.change_in_surplus,
        }
        for line_id, mw in sorted(self.expansion.items()):
            record[f'expansion_{line_id}'] = mw
        record['status'] = self.status
        return record


def evaluate_metrics(
    solution: PlanningSolution, case: CaseStudy, tol: float = IDENTITY_TOLERANCE
) -> MetricsRow:
    """Metrics of a certified solution, from recomputed primal quantities.

    Args:
        solution: Planning solution.
        case: Case it was solved on.
        tol: Relative tolerance of the welfare identity.

    Returns:
        Metrics row.

    Raises:
        CertificationFailure: If the solution is unproven, its certificate
            failed or the recomputed values disagree with the model.
        AnalysisError: If ``SW = TP + benefits`` is violated.
    """
    if not solution.proven:
        raise CertificationFailure(f"Solution at kappa={solution.kappa:g} is not proven optimal")
    if solution.certificate is None or not solution.certificate.passed:
        residuals = {
            key: value for key, value in (solution.certificate.to_dict() if solution.certificate else {}).items()
            if isinstance(value, float)}
        raise CertificationFailure(
            f"Market certificate failed at kappa={solution.kappa:g}", residuals)
    breakdown = recompute_metrics_from_primal(solution, case, strict=True).breakdown

    row = MetricsRow(
        kappa=solution.kappa,
        transco_profit=breakdown.transco_profit,
        social_welfare=breakdown.social_welfare,
        participant_benefits=breakdown.participant_benefits,
        fee_total=breakdown.fee_total,
        ms_total=breakdown.ms_total,
        cost_total=breakdown.cost_total,
        change_in_surplus=breakdown.change_in_surplus,
        expansion=solution.plan.expansion_by_line(case),
        gap=solution.gap,
        wall_time=solution.wall_time,
        statistics=dict(solution.statistics),
    )
    if row.identity_residual() > tol:
        raise AnalysisError(
            f"Welfare identity violated at kappa={row.kappa:g}: residual {row.identity_residual():.3g}")
    return row
