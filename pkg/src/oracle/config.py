"""Limits and tolerances of the brute-force oracle."""

# Largest number of plans enumerated without an explicit override
DEFAULT_BUDGET: int = 100_000

# Profits within TIE_TOLERANCE * (1 + |best|) are ties
TIE_TOLERANCE: float = 1e-9

# Slack below which an inequality counts as active
ACTIVE_TOLERANCE: float = 1e-7

DEFAULT_PARALLELISM: int = 1

TABLE_COLUMNS = (
    'plan_id', 'line', 'year', 'lump_mw', 'profit', 'welfare', 'fee_total', 'ms_total', 'cost_total')
