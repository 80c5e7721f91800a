"""Case study data: network, bids, horizon and policy, with seeded generators."""

from .case import (
    AgentKind,
    Bid,
    CaseStudy,
    Horizon,
    Line,
    Node,
    Policy,
    Provenance,
    lump_stride,
    max_bid_price,
    with_policy,
)
from .exceptions import CaseError, CaseIOError, CaseParseError, CaseValidationError
from .generators import GENERATORS, generate_garver_case, generate_two_node_case
from .indexing import CaseIndex, build_index
from .io import case_from_dict, case_to_dict, load_case, save_case

__version__ = "1.0.0"
__all__ = [
    "AgentKind",
    "Bid",
    "CaseStudy",
    "Horizon",
    "Line",
    "Node",
    "Policy",
    "Provenance",
    "lump_stride",
    "max_bid_price",
    "with_policy",
    "CaseError",
    "CaseIOError",
    "CaseParseError",
    "CaseValidationError",
    "GENERATORS",
    "generate_garver_case",
    "generate_two_node_case",
    "CaseIndex",
    "build_index",
    "case_from_dict",
    "case_to_dict",
    "load_case",
    "save_case",
]
