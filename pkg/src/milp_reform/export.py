"""Structured export of planning solutions."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from src.network_model import CaseStudy

from .audit import EnvelopeAudit
from .planning import PlanningSolution

logger = logging.getLogger(__name__)


def solution_to_dict(
    solution: PlanningSolution,
    case: CaseStudy,
    audit: Optional[EnvelopeAudit] = None,
) -> Dict[str, Any]:
    """Plan, fee per year, objective, gap, certificates and model statistics."""
    data: Dict[str, Any] = {
        'kappa': solution.kappa,
        'status': solution.status.value,
        'proven': solution.proven,
        'objective': solution.objective,
        'gap': solution.gap,
        'wall_time': solution.wall_time,
        'plan': list(solution.plan.to_records(case)),
        'fee': solution.fee.to_dict(),
        'surplus_per_hour': {str(t): s for t, s in sorted(solution.surplus.items())},
        'statistics': dict(solution.statistics),
        'certificate': solution.certificate.to_dict() if solution.certificate else None,
        'recomputation': (
            {**solution.recomputation.residuals(), 'consistent': solution.recomputation.consistent}
            if solution.recomputation else None),
        'certified': solution.certified,
    }
    if audit is not None:
        data['envelope_audit'] = audit.to_dict()
    return data


def export_solution(
    solution: PlanningSolution,
    case: CaseStudy,
    path: Union[str, Path],
    audit: Optional[EnvelopeAudit] = None,
) -> Path:
    """Write a planning solution as indented JSON.

    Returns:
        The written path.

    Raises:
        OSError: If the file cannot be written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(solution_to_dict(solution, case, audit), f, indent=2)
    logger.info(f"Planning solution written to {path}")
    return path
