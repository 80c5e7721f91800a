"""Seeded generators for the 2-node and Garver 6-node case studies.

All randomness comes from ``numpy.random.default_rng(seed)``; the draw
order is fixed so a seed always reproduces the same case.
"""

import json
import logging
from importlib import resources
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
from pydantic import ValidationError

from .case import AgentKind, Bid, CaseStudy, Horizon, Line, Node, Policy, Provenance
from .config import (
    DEFAULT_BASE_MVA,
    DEFAULT_BIG_M,
    DEFAULT_DISCOUNT_RATE,
    DEFAULT_K_FIX,
    DEFAULT_K_VAR,
    DEFAULT_KAPPA,
    DEFAULT_LUMPS,
    DEFAULT_PSI,
    DEFAULT_THETA_MAX,
    GARVER_DATA_FILE,
    GARVER_REFERENCE_AGENTS,
)
from .exceptions import CaseIOError, CaseValidationError
from .io import as_case_validation_error

logger = logging.getLogger(__name__)

_COMMON_DEFAULTS: Dict[str, Any] = {
    'lumps': DEFAULT_LUMPS,
    'k_fix': DEFAULT_K_FIX,
    'k_var': DEFAULT_K_VAR,
    'years': (1, 2),
    'periods': (1,),
    'psi': DEFAULT_PSI,
    'discount_rate': DEFAULT_DISCOUNT_RATE,
    'kappa': DEFAULT_KAPPA,
    'big_m': DEFAULT_BIG_M,
    'theta_max': DEFAULT_THETA_MAX,
    'base_mva': DEFAULT_BASE_MVA,
    'replicate_bids': True,
}

TWO_NODE_DEFAULTS: Dict[str, Any] = {
    **_COMMON_DEFAULTS,
    'n_generators': 50,
    'n_consumers': 50,
    'generator_price_mean': 40.0,
    'generator_price_std': 10.0,
    'consumer_price_mean': 50.0,
    'consumer_price_std': 10.0,
    'q_max_high': 10.0,
    'reactance': 0.2,
    'existing_capacity': 0.0,
}

GARVER_DEFAULTS: Dict[str, Any] = {
    **_COMMON_DEFAULTS,
    'agents_per_node': 1000,
    'generator_nodes': (1, 3, 6),
    'consumer_nodes': (1, 2, 3, 4, 5),
    'price_mean': 50.0,
    'price_std': 10.0,
    'q_max_high': 0.5,
    'node6_q_max_high': 1.0,
    'load_growth': 0.05,
    'topology': None,
    # None: agents_per_node / GARVER_REFERENCE_AGENTS
    'capacity_scale': None,
}


def _merge_overrides(
    defaults: Dict[str, Any], overrides: Optional[Mapping[str, Any]]
) -> Dict[str, Any]:
    params = dict(defaults)
    for key, value in (overrides or {}).items():
        if key not in defaults:
            raise CaseValidationError(
                f"Unknown generator override '{key}'; valid keys: {sorted(defaults)}",
                field=key)
        params[key] = value
    return params


def _json_safe(params: Dict[str, Any]) -> Dict[str, Any]:
    safe = {}
    for key, value in params.items():
        if isinstance(value, tuple):
            value = list(value)
        safe[key] = value
    if safe.get('lumps') == list(DEFAULT_LUMPS):
        safe['lumps'] = f'1..{len(DEFAULT_LUMPS)}'
    return safe


def _horizon_and_policy(params: Dict[str, Any]) -> Dict[str, Any]:
    return {
        'horizon': Horizon(
            years=tuple(params['years']),
            periods=tuple(params['periods']),
            psi=params['psi'],
            discount_rate=params['discount_rate'],
        ),
        'policy': Policy(kappa=params['kappa'], big_m=params['big_m']),
    }


def _emit_bids(
    kind: AgentKind,
    nodes: np.ndarray,
    prices: np.ndarray,
    q_max: np.ndarray,
    params: Dict[str, Any],
    rng: np.random.Generator,
    price_mean: float,
    price_std: float,
    growth: float = 0.0,
) -> List[Bid]:
    """Replicate one set of draws over all (year, period) slices.

    With ``replicate_bids`` off every slice after the first gets fresh
    price draws from the same distribution, continuing the generator stream.
    """
    bids = []
    first = True
    for t in params['years']:
        scale = (1.0 + growth) ** (t - 1)
        for s in params['periods']:
            slice_prices = prices
            if not first and not params['replicate_bids']:
                slice_prices = rng.normal(price_mean, price_std, len(prices))
            first = False
            for node, price, cap in zip(nodes, slice_prices, q_max):
                bids.append(Bid(
                    agent_kind=kind,
                    node=int(node),
                    year=t,
                    period=s,
                    price=float(price),
                    q_min=0.0,
                    q_max=float(max(cap, 0.0) * scale),
                ))
    return bids


def generate_two_node_case(
    seed: int, overrides: Optional[Mapping[str, Any]] = None
) -> CaseStudy:
    """Generate the randomized 2-node case.

    Node 1 hosts the generators, node 2 the consumers, joined by one line
    without existing capacity.

    Args:
        seed: Seed of the random stream.
        overrides: Replacement values for keys of ``TWO_NODE_DEFAULTS``.

    Returns:
        Validated case study with provenance.

    Raises:
        CaseValidationError: On unknown override keys or invalid values.
    """
    params = _merge_overrides(TWO_NODE_DEFAULTS, overrides)
    rng = np.random.default_rng(seed)

    n_gen, n_con = params['n_generators'], params['n_consumers']
    gen_prices = rng.normal(params['generator_price_mean'], params['generator_price_std'], n_gen)
    con_prices = rng.normal(params['consumer_price_mean'], params['consumer_price_std'], n_con)
    gen_q_max = rng.uniform(0.0, params['q_max_high'], n_gen)
    con_q_max = rng.uniform(0.0, params['q_max_high'], n_con)

    try:
        bids = (
            _emit_bids(AgentKind.GENERATOR, np.full(n_gen, 1), gen_prices, gen_q_max, params, rng,
                       params['generator_price_mean'], params['generator_price_std'])
            + _emit_bids(AgentKind.CONSUMER, np.full(n_con, 2), con_prices, con_q_max, params, rng,
                         params['consumer_price_mean'], params['consumer_price_std'])
        )
        line = Line(
            id=1,
            from_node=1,
            to_node=2,
            susceptance=1.0 / params['reactance'],
            existing_capacity=params['existing_capacity'],
            lumps=tuple(float(mw) for mw in params['lumps']),
            fixed_cost=params['k_fix'],
            variable_cost=params['k_var'],
        )
        case = CaseStudy(
            nodes=(Node(id=1, theta_max=params['theta_max']),
                   Node(id=2, theta_max=params['theta_max'])),
            lines=(line,),
            bids=tuple(bids),
            provenance=Provenance(generator='two_node', seed=seed, parameters=_json_safe(params)),
            base_mva=params['base_mva'],
            **_horizon_and_policy(params),
        )
    except ValidationError as e:
        raise as_case_validation_error(e) from e
    logger.info(f"Generated two_node case (seed {seed}): {len(bids)} bids")
    return case


def _scaled(value: float, scale: float) -> float:
    return round(float(value) * scale, 9)


def load_garver_topology() -> Dict[str, Any]:
    """Read the shipped Garver 6-node topology."""
    try:
        text = resources.files(__package__).joinpath('data').joinpath(GARVER_DATA_FILE).read_text(
            encoding='utf-8')
    except OSError as e:
        raise CaseIOError(f"Cannot read Garver topology data: {e}") from e
    return json.loads(text)


def generate_garver_case(
    seed: int, overrides: Optional[Mapping[str, Any]] = None
) -> CaseStudy:
    """Generate the randomized Garver 6-node case.

    Bid quantities are drawn per agent, so total supply and demand grow with
    ``agents_per_node``. Existing ratings, lump sizes and fixed costs are
    multiplied by ``capacity_scale`` (by default agents_per_node / 1000) so a
    reduced population sees the same congestion as the full-size network.

    Args:
        seed: Seed of the random stream.
        overrides: Replacement values for keys of ``GARVER_DEFAULTS``;
            ``topology`` may hold a document shaped like the shipped data file.

    Returns:
        Validated case study with provenance.

    Raises:
        CaseValidationError: On unknown override keys or invalid values.
    """
    params = _merge_overrides(GARVER_DEFAULTS, overrides)
    topology = params['topology'] or load_garver_topology()
    rng = np.random.default_rng(seed)
    n = int(params['agents_per_node'])
    scale = params['capacity_scale']
    if scale is None:
        scale = n / GARVER_REFERENCE_AGENTS
    if not scale > 0:
        raise CaseValidationError(f"capacity_scale must be positive, got {scale}", field='capacity_scale')
    params['capacity_scale'] = float(scale)
    if scale != 1.0:
        logger.warning(
            f"Scaling Garver ratings, lumps and fixed costs by {scale:g} "
            f"for {n} agents per node")

    gen_nodes = np.repeat(np.array(params['generator_nodes'], dtype=int), n)
    con_nodes = np.repeat(np.array(params['consumer_nodes'], dtype=int), n)
    gen_prices = rng.normal(params['price_mean'], params['price_std'], len(gen_nodes))
    con_prices = rng.normal(params['price_mean'], params['price_std'], len(con_nodes))
    gen_q_max = rng.uniform(0.0, params['q_max_high'], len(gen_nodes))
    node6 = gen_nodes == 6
    gen_q_max[node6] = rng.uniform(0.0, params['node6_q_max_high'], int(node6.sum()))
    con_q_max = rng.uniform(0.0, params['q_max_high'], len(con_nodes))

    price_args = (params['price_mean'], params['price_std'])
    recorded = {key: value for key, value in params.items() if key != 'topology'}
    recorded['topology_version'] = topology.get('version')
    try:
        bids = (
            _emit_bids(AgentKind.GENERATOR, gen_nodes, gen_prices, gen_q_max, params, rng,
                       *price_args)
            + _emit_bids(AgentKind.CONSUMER, con_nodes, con_prices, con_q_max, params, rng,
                         *price_args, growth=params['load_growth'])
        )
        lines = tuple(
            Line(
                id=branch['id'],
                from_node=branch['from'],
                to_node=branch['to'],
                susceptance=1.0 / branch['reactance'],
                existing_capacity=_scaled(branch['capacity'], scale),
                lumps=tuple(_scaled(mw, scale) for mw in params['lumps']),
                fixed_cost=_scaled(params['k_fix'], scale),
                variable_cost=params['k_var'],
            )
            for branch in topology['branches']
        )
        case = CaseStudy(
            nodes=tuple(Node(id=node_id, theta_max=params['theta_max'])
                        for node_id in topology['nodes']),
            lines=lines,
            bids=tuple(bids),
            provenance=Provenance(generator='garver6', seed=seed, parameters=_json_safe(recorded)),
            base_mva=params['base_mva'],
            **_horizon_and_policy(params),
        )
    except ValidationError as e:
        raise as_case_validation_error(e) from e
    logger.info(
        f"Generated garver6 case (seed {seed}, {n} agents per node): {len(bids)} bids")
    return case


GENERATORS = {
    'two_node': generate_two_node_case,
    'garver6': generate_garver_case,
}
