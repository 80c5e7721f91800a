"""Pytest configuration and fixtures."""

import logging
import math
import tempfile
from pathlib import Path
from typing import Dict, Iterable, Sequence, Tuple

import pytest

from src.analysis import MetricsRow, SweepTable
from src.network_model import (
    AgentKind,
    Bid,
    CaseStudy,
    Horizon,
    Line,
    Node,
    Policy,
    save_case,
    with_policy,
)
from src.solver_iface import SolverSettings

TOY_GENERATORS: Tuple[Tuple[float, float], ...] = ((10.0, 2.5), (20.0, 1.7), (30.0, 3.1))
TOY_CONSUMERS: Tuple[Tuple[float, float], ...] = ((60.0, 2.2), (45.0, 1.9), (35.0, 2.6))

# Transco profit of building L MW in year 2 on the toy case
TOY_PROFIT: Dict[float, Dict[int, float]] = {
    0.0: {1: 47.0, 2: 96.0, 3: 70.0, 4: 94.0, 5: 18.0},
    0.5: {1: 47.0, 2: 96.0, 3: 99.0, 4: 123.0, 5: 88.5},
    1.0: {1: 47.0, 2: 96.0, 3: 128.0, 4: 152.0, 5: 159.0},
}
TOY_BEST: Dict[float, Tuple[int, float]] = {0.0: (2, 96.0), 0.5: (4, 123.0), 1.0: (5, 159.0)}


def slice_bids(
    year: int,
    generators: Iterable[Tuple[float, float]],
    consumers: Iterable[Tuple[float, float]],
    gen_node: int = 1,
    con_node: int = 2,
) -> Tuple[Bid, ...]:
    """Bids of one year: (price, q_max) pairs on a generator and a consumer node."""
    return tuple(
        [Bid(agent_kind=AgentKind.GENERATOR, node=gen_node, year=year, period=1, price=p, q_max=q)
         for p, q in generators]
        + [Bid(agent_kind=AgentKind.CONSUMER, node=con_node, year=year, period=1, price=p, q_max=q)
           for p, q in consumers]
    )


def two_bus_case(
    bids: Sequence[Bid],
    capacity: float = 0.0,
    lumps: Tuple[float, ...] = (),
    fixed_cost: float = 0.0,
    variable_cost: float = 0.0,
    years: Tuple[int, ...] = (1, 2),
    discount_rate: float = 0.0,
) -> CaseStudy:
    """Two nodes joined by line 1 (from node 1 to node 2), psi = 1."""
    return CaseStudy(
        nodes=(Node(id=1), Node(id=2)),
        lines=(Line(
            id=1, from_node=1, to_node=2, susceptance=5.0, existing_capacity=capacity,
            lumps=lumps, fixed_cost=fixed_cost, variable_cost=variable_cost),),
        bids=tuple(bids),
        horizon=Horizon(years=years, psi=1.0, discount_rate=discount_rate),
        policy=Policy(kappa=1.0, big_m=1000.0),
    )


def make_toy_case(kappa: float = 1.0, discount_rate: float = 0.0) -> CaseStudy:
    """Three generators at node 1, three consumers at node 2, lumps 1..5 MW."""
    bids = slice_bids(1, TOY_GENERATORS, TOY_CONSUMERS) + slice_bids(2, TOY_GENERATORS, TOY_CONSUMERS)
    case = two_bus_case(
        bids, capacity=0.0, lumps=(1.0, 2.0, 3.0, 4.0, 5.0), fixed_cost=2.0, variable_cost=1.0,
        discount_rate=discount_rate)
    return with_policy(case, kappa=kappa)


def make_row(kappa: float, benefits: float, tp: float = 10.0, expansion: float = 5.0) -> MetricsRow:
    """Metrics row satisfying SW = TP + benefits."""
    return MetricsRow(
        kappa=kappa,
        transco_profit=tp,
        social_welfare=tp + benefits,
        participant_benefits=benefits,
        fee_total=kappa * 2.0,
        ms_total=tp,
        cost_total=1.0,
        change_in_surplus=2.0,
        expansion={1: expansion},
    )


@pytest.fixture
def toy_case():
    """The six-bid toy case with kappa = 1."""
    return make_toy_case()


@pytest.fixture
def congested_case():
    """Generator at 40 and load at 50, 10 MW each, across a 5 MW line."""
    bids = (slice_bids(1, [(40.0, 10.0)], [(50.0, 10.0)])
            + slice_bids(2, [(40.0, 10.0)], [(50.0, 10.0)]))
    return two_bus_case(bids, capacity=5.0)


@pytest.fixture
def undersized_m_case():
    """Congested only in year 2, with M below both the bids and the year-2 congestion dual."""
    bids = (slice_bids(1, [(40.0, 10.0)], [(50.0, 5.0)])
            + slice_bids(2, [(40.0, 30.0)], [(50.0, 20.0)]))
    case = two_bus_case(bids, capacity=10.0, lumps=(20.0,), fixed_cost=0.1, variable_cost=0.01)
    return with_policy(case, big_m=5.0, strict=False)


@pytest.fixture
def toy_case_file(toy_case, temp_directory):
    """Toy case saved as JSON."""
    return save_case(toy_case, Path(temp_directory) / 'toy.json')


@pytest.fixture
def solver_settings():
    """Default scipy/HiGHS settings."""
    return SolverSettings()


@pytest.fixture
def sample_table():
    """Sweep table with a benefits peak at kappa = 0.57."""
    rows = [
        make_row(0.0, 2.0, expansion=3.0),
        make_row(0.25, 5.0),
        make_row(0.57, 6.65),
        make_row(0.75, 4.0),
        make_row(1.0, 0.0, expansion=8.0),
    ]
    return SweepTable(rows=tuple(rows), provenance={'generator': 'two_node', 'seed': 42})


@pytest.fixture
def failed_row():
    """Row of a kappa whose solve failed."""
    row = MetricsRow.failed(0.5, 'solver_error', 'backend crashed')
    assert math.isnan(row.transco_profit)
    return row


@pytest.fixture
def test_logger():
    """Create a test logger."""
    logger = logging.getLogger("test_logger")
    logger.setLevel(logging.DEBUG)
    return logger


@pytest.fixture
def temp_directory():
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield temp_dir
