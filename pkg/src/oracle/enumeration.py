"""Exhaustive enumeration of lumpy expansion plans."""

import itertools
import logging
from typing import List, Mapping, Optional, Sequence, Tuple, Union

from src.lp_market import ExpansionPlan, Selection
from src.network_model import CaseStudy

from .config import DEFAULT_BUDGET
from .exceptions import EnumerationBudgetError

logger = logging.getLogger(__name__)

Caps = Optional[Union[int, Mapping[int, int]]]
Option = Optional[Tuple[int, int]]


def _line_options(case: CaseStudy, caps: Caps) -> List[Sequence[Option]]:
    """Per line: no build, or one (year, lump) with year >= 2."""
    build_years = [t for t in case.years if t >= 2]
    options = []
    for line in case.lines:
        if caps is None:
            cap = len(line.lumps)
        elif isinstance(caps, int):
            cap = caps
        else:
            cap = caps.get(line.id, len(line.lumps))
        lumps = range(min(max(cap, 0), len(line.lumps)))
        options.append([None] + [(t, j) for t in build_years for j in lumps])
    return options


def count_plans(case: CaseStudy, caps: Caps = None) -> int:
    """``prod_l (1 + |years after the first| * |lumps considered on l|)``."""
    count = 1
    for options in _line_options(case, caps):
        count *= len(options)
    return count


def check_plan_budget(case: CaseStudy, caps: Caps = None, budget: int = DEFAULT_BUDGET) -> int:
    """Count the plans and refuse a plan space larger than ``budget``.

    Raises:
        EnumerationBudgetError: If the plan count exceeds ``budget``.
    """
    count = count_plans(case, caps)
    if count > budget:
        raise EnumerationBudgetError(
            f"{count} plans exceed the enumeration budget of {budget}; "
            f"coarsen the lump menus or cap the lumps per line",
            count=count,
            budget=budget,
        )
    return count


def enumerate_plans(
    case: CaseStudy, caps: Caps = None, budget: int = DEFAULT_BUDGET
) -> List[ExpansionPlan]:
    """Every plan building at most one lump per line, in a fixed order.

    The empty plan comes first; later plans follow the product of per-line
    options with the first line varying slowest.

    Args:
        case: Case study.
        caps: Number of smallest lumps considered per line, as one int for
            every line or ``{line id: count}``; all lumps when omitted.
        budget: Largest number of plans to produce.

    Returns:
        The plans in enumeration order.

    Raises:
        EnumerationBudgetError: If the plan count exceeds ``budget``.
    """
    check_plan_budget(case, caps, budget)
    line_ids = [line.id for line in case.lines]
    plans = [
        ExpansionPlan(tuple(
            Selection(line_id, choice[0], choice[1])
            for line_id, choice in zip(line_ids, combination)
            if choice is not None
        ))
        for combination in itertools.product(*_line_options(case, caps))
    ]
    logger.info(f"Enumerated {len(plans)} expansion plans")
    return plans
