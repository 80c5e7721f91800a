"""Positional index over a case study for building models from arrays."""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .case import CaseStudy

TimeSlice = Tuple[int, int]


@dataclass(frozen=True)
class CaseIndex:
    """Array view of a case.

    Bids keep the order of ``case.bids``; time slices are ordered by year
    then period. Node position 0 is the reference node.
    """
    node_ids: Tuple[int, ...]
    line_ids: Tuple[int, ...]
    node_pos: Dict[int, int]
    line_pos: Dict[int, int]
    line_from: np.ndarray
    line_to: np.ndarray
    susceptance: np.ndarray
    existing_capacity: np.ndarray
    theta_max: np.ndarray
    bid_price: np.ndarray
    bid_q_min: np.ndarray
    bid_q_max: np.ndarray
    bid_is_generator: np.ndarray
    bid_node: np.ndarray
    bid_slice: np.ndarray
    time_slices: Tuple[TimeSlice, ...]
    slice_bids: Tuple[np.ndarray, ...]
    year_slices: Dict[int, Tuple[int, ...]]

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_lines(self) -> int:
        return len(self.line_ids)

    @property
    def n_bids(self) -> int:
        return len(self.bid_price)

    @property
    def n_slices(self) -> int:
        return len(self.time_slices)

    def incidence(self) -> np.ndarray:
        """Node-by-line matrix with +1 at the sending and -1 at the receiving node."""
        matrix = np.zeros((self.n_nodes, self.n_lines))
        columns = np.arange(self.n_lines)
        matrix[self.line_from, columns] = 1.0
        matrix[self.line_to, columns] = -1.0
        return matrix


def build_index(case: CaseStudy) -> CaseIndex:
    """Build the positional index of a case."""
    node_ids = tuple(node.id for node in case.nodes)
    line_ids = tuple(line.id for line in case.lines)
    node_pos = {node_id: pos for pos, node_id in enumerate(node_ids)}
    line_pos = {line_id: pos for pos, line_id in enumerate(line_ids)}

    time_slices = tuple((t, s) for t in case.years for s in case.periods)
    slice_pos = {ts: pos for pos, ts in enumerate(time_slices)}

    bid_slice = np.array([slice_pos[(bid.year, bid.period)] for bid in case.bids], dtype=int)
    members: List[List[int]] = [[] for _ in time_slices]
    for position, k in enumerate(bid_slice):
        members[k].append(position)

    year_slices = {
        t: tuple(slice_pos[(t, s)] for s in case.periods) for t in case.years}

    return CaseIndex(
        node_ids=node_ids,
        line_ids=line_ids,
        node_pos=node_pos,
        line_pos=line_pos,
        line_from=np.array([node_pos[line.from_node] for line in case.lines], dtype=int),
        line_to=np.array([node_pos[line.to_node] for line in case.lines], dtype=int),
        susceptance=np.array([line.susceptance for line in case.lines], dtype=float),
        existing_capacity=np.array([line.existing_capacity for line in case.lines], dtype=float),
        theta_max=np.array([node.theta_max for node in case.nodes], dtype=float),
        bid_price=np.array([bid.price for bid in case.bids], dtype=float),
        bid_q_min=np.array([bid.q_min for bid in case.bids], dtype=float),
        bid_q_max=np.array([bid.q_max for bid in case.bids], dtype=float),
        bid_is_generator=np.array([bid.is_generator for bid in case.bids], dtype=bool),
        bid_node=np.array([node_pos[bid.node] for bid in case.bids], dtype=int),
        bid_slice=bid_slice,
        time_slices=time_slices,
        slice_bids=tuple(np.array(m, dtype=int) for m in members),
        year_slices=year_slices,
    )
