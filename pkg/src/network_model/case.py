"""Case study data model: network, bids, horizon and regulatory policy."""

import logging
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import (
    DEFAULT_BASE_MVA,
    DEFAULT_BIG_M,
    DEFAULT_DISCOUNT_RATE,
    DEFAULT_KAPPA,
    DEFAULT_PSI,
    DEFAULT_THETA_MAX,
)

logger = logging.getLogger(__name__)


class AgentKind(str, Enum):
    """Side of the market a bid belongs to."""
    GENERATOR = 'generator'
    CONSUMER = 'consumer'


class Node(BaseModel):
    """Network node with its voltage-angle limit."""

    model_config = ConfigDict(frozen=True)

    id: int
    theta_max: float = Field(default=DEFAULT_THETA_MAX, gt=0)


class Line(BaseModel):
    """Transmission line with its lumpy expansion menu and costs.

    Attributes:
        from_node: Sending node id (serialized as ``from``).
        to_node: Receiving node id (serialized as ``to``).
        susceptance: Per-unit susceptance.
        existing_capacity: Capacity before any expansion in MW
            (serialized as ``capacity``).
        lumps: Strictly increasing expansion sizes in MW.
        fixed_cost: Fixed cost of an expansion per operating hour
            (serialized as ``k_fix``).
        variable_cost: Cost per MW of expansion per operating hour
            (serialized as ``k_var``).
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    id: int
    from_node: int = Field(alias='from')
    to_node: int = Field(alias='to')
    susceptance: float = Field(gt=0)
    existing_capacity: float = Field(default=0.0, alias='capacity', ge=0)
    lumps: Tuple[float, ...] = ()
    fixed_cost: float = Field(default=0.0, alias='k_fix', ge=0)
    variable_cost: float = Field(default=0.0, alias='k_var', ge=0)

    @field_validator('lumps')
    @classmethod
    def _lumps_increasing(cls, lumps: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(size <= 0 for size in lumps):
            raise ValueError('lump sizes must be positive')
        if any(b <= a for a, b in zip(lumps, lumps[1:])):
            raise ValueError('lump sizes must be strictly increasing')
        return lumps

    @model_validator(mode='after')
    def _distinct_endpoints(self) -> 'Line':
        if self.from_node == self.to_node:
            raise ValueError(f'line {self.id} connects node {self.from_node} to itself')
        return self


class Bid(BaseModel):
    """Single price-quantity bid of a generator or consumer."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    agent_kind: AgentKind = Field(alias='kind')
    node: int
    year: int
    period: int
    price: float
    q_min: float = Field(default=0.0, ge=0)
    q_max: float

    @field_validator('price')
    @classmethod
    def _finite_price(cls, price: float) -> float:
        if not math.isfinite(price):
            raise ValueError('bid price must be finite')
        return price

    @model_validator(mode='after')
    def _bounds_ordered(self) -> 'Bid':
        if self.q_min > self.q_max:
            raise ValueError(f'q_min {self.q_min} exceeds q_max {self.q_max}')
        return self

    @property
    def is_generator(self) -> bool:
        return self.agent_kind is AgentKind.GENERATOR


class Horizon(BaseModel):
    """Investment years, operating periods and time scaling.

    Year 1 is the pre-investment baseline; years are consecutive from 1.
    """

    model_config = ConfigDict(frozen=True)

    years: Tuple[int, ...]
    periods: Tuple[int, ...] = (1,)
    psi: float = Field(default=DEFAULT_PSI, gt=0)
    discount_rate: float = Field(default=DEFAULT_DISCOUNT_RATE, ge=0)

    @field_validator('years')
    @classmethod
    def _years_consecutive(cls, years: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(years) < 2:
            raise ValueError('horizon needs at least two years')
        if tuple(years) != tuple(range(1, len(years) + 1)):
            raise ValueError('years must be consecutive starting at 1')
        return years

    @field_validator('periods')
    @classmethod
    def _periods_unique(cls, periods: Tuple[int, ...]) -> Tuple[int, ...]:
        if not periods or len(set(periods)) != len(periods):
            raise ValueError('periods must be a nonempty set')
        return periods

    def discount(self, year: int) -> float:
        """Present-value factor 1/(1+r)^(t-1)."""
        return 1.0 / (1.0 + self.discount_rate) ** (year - 1)


class Policy(BaseModel):
    """Regulatory parameters: incentive share and big-M constant."""

    model_config = ConfigDict(frozen=True)

    kappa: float = Field(default=DEFAULT_KAPPA, ge=0, le=1)
    big_m: float = Field(default=DEFAULT_BIG_M, gt=0)


class Provenance(BaseModel):
    """Record of how a case was produced."""

    model_config = ConfigDict(frozen=True)

    generator: Optional[str] = None
    seed: Optional[int] = None
    parameters: Dict[str, Any] = Field(default_factory=dict)


class CaseStudy(BaseModel):
    """Complete primal data of a planning instance.

    The first node is the reference node (angle fixed at zero).
    """

    model_config = ConfigDict(frozen=True)

    nodes: Tuple[Node, ...]
    lines: Tuple[Line, ...]
    bids: Tuple[Bid, ...]
    horizon: Horizon
    policy: Policy = Field(default_factory=Policy)
    provenance: Provenance = Field(default_factory=Provenance)
    base_mva: float = Field(default=DEFAULT_BASE_MVA, gt=0)

    @model_validator(mode='after')
    def _references_exist(self) -> 'CaseStudy':
        if not self.nodes:
            raise ValueError('case needs at least one node')
        node_ids = [node.id for node in self.nodes]
        if len(set(node_ids)) != len(node_ids):
            raise ValueError('node ids must be unique')
        line_ids = [line.id for line in self.lines]
        if len(set(line_ids)) != len(line_ids):
            raise ValueError('line ids must be unique')
        known = set(node_ids)
        for line in self.lines:
            if line.from_node not in known or line.to_node not in known:
                raise ValueError(f'line {line.id} references an unknown node')
        years = set(self.horizon.years)
        periods = set(self.horizon.periods)
        for position, bid in enumerate(self.bids):
            if bid.node not in known:
                raise ValueError(f'bid {position} references unknown node {bid.node}')
            if bid.year not in years or bid.period not in periods:
                raise ValueError(f'bid {position} lies outside the horizon')
            if bid.q_min > 0:
                logger.debug(f'Bid {position} has nonzero q_min {bid.q_min}')
        if self.bids and max_bid_price(self) > self.policy.big_m:
            raise ValueError(
                f'policy.big_m {self.policy.big_m} is below the largest bid price '
                f'{max_bid_price(self)}')
        return self

    @property
    def reference_node(self) -> int:
        return self.nodes[0].id

    @property
    def years(self) -> Tuple[int, ...]:
        return self.horizon.years

    @property
    def periods(self) -> Tuple[int, ...]:
        return self.horizon.periods

    def line(self, line_id: int) -> Line:
        for line in self.lines:
            if line.id == line_id:
                return line
        raise KeyError(f'unknown line {line_id}')

    def bid_counts(self) -> Dict[Tuple[int, int], Tuple[int, int]]:
        """Number of (generator, consumer) bids per (year, period)."""
        counts: Dict[Tuple[int, int], List[int]] = {
            (t, s): [0, 0] for t in self.years for s in self.periods}
        for bid in self.bids:
            counts[(bid.year, bid.period)][0 if bid.is_generator else 1] += 1
        return {key: (gens, cons) for key, (gens, cons) in counts.items()}


def max_bid_price(case: CaseStudy) -> float:
    """Largest absolute bid price in the case."""
    return max((abs(bid.price) for bid in case.bids), default=0.0)


def with_policy(
    case: CaseStudy,
    *,
    kappa: Optional[float] = None,
    big_m: Optional[float] = None,
    strict: bool = True,
) -> CaseStudy:
    """Return a copy of the case with a different policy.

    Args:
        case: Source case.
        kappa: New incentive share, or None to keep.
        big_m: New big-M constant, or None to keep.
        strict: Re-validate the whole case. Pass False only to build
            deliberately inconsistent cases (e.g. an undersized big-M).

    Returns:
        New case study.
    """
    policy = case.policy.model_copy(update={
        key: value for key, value in (('kappa', kappa), ('big_m', big_m)) if value is not None
    })
    if strict:
        policy = Policy.model_validate(policy.model_dump())
        return CaseStudy.model_validate({**_shallow_fields(case), 'policy': policy})
    return case.model_copy(update={'policy': policy})


def lump_stride(case: CaseStudy, stride: int) -> CaseStudy:
    """Coarsen every lump menu to every ``stride``-th size.

    The largest lump of each line is always kept. The transformation is
    recorded in the provenance and logged.

    Args:
        case: Source case.
        stride: Keep sizes at positions stride-1, 2*stride-1, ...

    Returns:
        Case with coarsened menus (the same case when stride is 1).
    """
    if stride < 1:
        raise ValueError('lump stride must be at least 1')
    if stride == 1:
        return case
    lines = []
    for line in case.lines:
        kept = list(line.lumps[stride - 1::stride])
        if line.lumps and (not kept or kept[-1] != line.lumps[-1]):
            kept.append(line.lumps[-1])
        logger.warning(
            f'Coarsening lump menu of line {line.id}: {len(line.lumps)} -> {len(kept)} sizes '
            f'(stride {stride})')
        lines.append(line.model_copy(update={'lumps': tuple(kept)}))
    parameters = {**case.provenance.parameters, 'lump_stride': stride}
    provenance = case.provenance.model_copy(update={'parameters': parameters})
    return case.model_copy(update={'lines': tuple(lines), 'provenance': provenance})


def _shallow_fields(case: CaseStudy) -> Dict[str, Any]:
    return {name: getattr(case, name) for name in CaseStudy.model_fields}
