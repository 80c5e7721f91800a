"""Sweep reports: metrics CSV and the three-row summary."""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

from .config import CSV_COLUMNS, FLOAT_FORMAT, SUMMARY_JSON, SWEEP_CSV
from .exceptions import EmptySweepError, ReportError
from .metrics import MetricsRow
from .sweep import SweepTable, participant_optimal_kappa, summary_rows

logger = logging.getLogger(__name__)

KNOWN_FORMATS = ('csv', 'json', 'txt')
SUMMARY_TXT = 'summary.txt'


def _six_digits(value: Any) -> Any:
    if isinstance(value, float):
        return float(FLOAT_FORMAT % value) if math.isfinite(value) else None
    return value


def summary_to_dict(table: SweepTable) -> Dict[str, Any]:
    """Summary rows and failures; a sweep without successful rows has no kappa*."""
    ok = bool(table.ok_rows)
    return {
        'provenance': table.provenance,
        'kappa_star': _six_digits(participant_optimal_kappa(table)[0]) if ok else None,
        'rows': [
            {'label': label, **{k: _six_digits(v) for k, v in row.to_record().items()}}
            for label, row in (summary_rows(table) if ok else [])
        ],
        'failed': [
            {'kappa': row.kappa, 'status': row.status, 'message': row.message}
            for row in table.failed_rows
        ],
    }


def format_summary(table: SweepTable) -> str:
    """Summary rows as aligned text."""
    header = f"{'':>8} {'kappa':>8} {'TP':>12} {'SW':>12} {'benefits':>12} {'expansion':>10}"
    lines = [header]
    for label, row in (summary_rows(table) if table.ok_rows else []):
        lines.append(
            f"{label:>8} {row.kappa:>8.3g} {row.transco_profit:>12.6g} {row.social_welfare:>12.6g} "
            f"{row.participant_benefits:>12.6g} {row.total_expansion:>10.6g}")
    for row in table.failed_rows:
        lines.append(f"failed   kappa={row.kappa:g} ({row.status}): {row.message}")
    return '\n'.join(lines)


def _csv_columns(rows: Sequence[MetricsRow]) -> List[str]:
    line_ids = sorted({line_id for row in rows for line_id in row.expansion})
    return list(CSV_COLUMNS) + [f'expansion_{line_id}' for line_id in line_ids] + ['status']


def emit_report(
    table: SweepTable,
    out_dir: Union[str, Path],
    formats: Sequence[str] = ('csv', 'json'),
) -> List[Path]:
    """Write the sweep CSV and summary files.

    Args:
        table: Sweep table.
        out_dir: Output directory, created when missing.
        formats: Any of ``csv`` (per-kappa metrics), ``json`` and ``txt``
            (summary); an empty sequence writes nothing.

    Returns:
        Written paths.

    Raises:
        EmptySweepError: If the table has no rows.
        ReportError: On an unknown format or a write failure.
    """
    unknown = [fmt for fmt in formats if fmt not in KNOWN_FORMATS]
    if unknown:
        raise ReportError(f"Unknown report formats {unknown}; valid: {', '.join(KNOWN_FORMATS)}")
    if not formats:
        return []
    if not table.rows:
        raise EmptySweepError('cannot report an empty sweep')

    out_dir = Path(out_dir)
    written: List[Path] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if 'csv' in formats:
            path = out_dir / SWEEP_CSV
            frame = table.to_frame().reindex(columns=_csv_columns(table.rows))
            frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
            written.append(path)
        if 'json' in formats:
            path = out_dir / SUMMARY_JSON
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(summary_to_dict(table), f, indent=2)
            written.append(path)
        if 'txt' in formats:
            path = out_dir / SUMMARY_TXT
            path.write_text(format_summary(table) + '\n', encoding='utf-8')
            written.append(path)
    except OSError as e:
        raise ReportError(f"Failed to write report to {out_dir}: {e}") from e

    logger.info(f"Report written: {', '.join(str(p) for p in written)}")
    return written
