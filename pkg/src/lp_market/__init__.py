"""Wholesale market clearing for a fixed expansion plan and its surplus accounting."""

from .exceptions import InvalidPlanError, MarketError
from .outcome import (
    MarketOutcome,
    SurplusReport,
    compute_surpluses,
    congestion_rent,
    export_outcome,
    welfare_per_hour,
)
from .plan import ExpansionPlan, Selection
from .wsm import MarketBlocks, add_market_primal, build_wsm_lp, market_bids, slice_capacity, solve_wsm

__version__ = "1.0.0"
__all__ = [
    "InvalidPlanError",
    "MarketError",
    "MarketOutcome",
    "SurplusReport",
    "compute_surpluses",
    "congestion_rent",
    "export_outcome",
    "welfare_per_hour",
    "ExpansionPlan",
    "Selection",
    "MarketBlocks",
    "add_market_primal",
    "build_wsm_lp",
    "market_bids",
    "slice_capacity",
    "solve_wsm",
]
