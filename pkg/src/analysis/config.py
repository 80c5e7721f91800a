"""Sweep defaults and report layout."""

from typing import Tuple

DEFAULT_GRID: str = '0:1:0.25'
DEFAULT_PARALLELISM: int = 1

# SW = TP + benefits, relative
IDENTITY_TOLERANCE: float = 1e-6

# Grid points closer than this are the same kappa
GRID_TOLERANCE: float = 1e-9

CSV_COLUMNS: Tuple[str, ...] = (
    'kappa', 'tp', 'sw', 'benefits', 'fee', 'ms', 'cost', 'change_in_surplus')
FLOAT_FORMAT: str = '%.6g'
SWEEP_CSV: str = 'sweep.csv'
SUMMARY_JSON: str = 'summary.json'
