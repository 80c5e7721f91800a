"""Lumpy expansion plans: which lump each line gets, and when."""

from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, NamedTuple, Optional, Tuple

import numpy as np
from typing_extensions import Self

from src.network_model import CaseStudy

from .exceptions import InvalidPlanError


class Selection(NamedTuple):
    """Lump ``lump`` (0-based position in the line's menu) built on ``line`` in ``year``."""
    line: int
    year: int
    lump: int


@dataclass(frozen=True)
class ExpansionPlan:
    """At most one selection per line, never in year 1.

    Selections are kept sorted by line id so equal plans compare and hash
    equal regardless of construction order.
    """
    selections: Tuple[Selection, ...] = ()

    def __post_init__(self) -> None:
        selections = tuple(sorted(Selection(*s) for s in self.selections))
        lines = [s.line for s in selections]
        if len(set(lines)) != len(lines):
            raise InvalidPlanError(f"Line selected more than once: {lines}")
        for s in selections:
            if s.year < 2:
                raise InvalidPlanError(
                    f"Line {s.line} expanded in year {s.year}; expansion starts in year 2")
            if s.lump < 0:
                raise InvalidPlanError(f"Negative lump index on line {s.line}")
        object.__setattr__(self, 'selections', selections)

    @classmethod
    def empty(cls) -> Self:
        return cls(())

    @classmethod
    def from_mw(cls, case: CaseStudy, builds: Mapping[int, Tuple[int, float]]) -> Self:
        """Build a plan from ``{line: (year, lump MW)}``."""
        selections = []
        for line_id, (year, mw) in builds.items():
            lumps = _line(case, line_id).lumps
            matches = [j for j, size in enumerate(lumps) if np.isclose(size, mw)]
            if not matches:
                raise InvalidPlanError(f"Line {line_id} has no {mw} MW lump")
            selections.append(Selection(line_id, year, matches[0]))
        return cls(tuple(selections))

    @property
    def is_empty(self) -> bool:
        return not self.selections

    def selection(self, line_id: int) -> Optional[Selection]:
        for s in self.selections:
            if s.line == line_id:
                return s
        return None

    def validate_for(self, case: CaseStudy) -> None:
        """Raise ``InvalidPlanError`` unless every selection fits the case."""
        years = set(case.years)
        for s in self.selections:
            line = _line(case, s.line)
            if s.year not in years:
                raise InvalidPlanError(f"Line {s.line} expanded in year {s.year} outside horizon")
            if s.lump >= len(line.lumps):
                raise InvalidPlanError(
                    f"Line {s.line} has {len(line.lumps)} lumps; index {s.lump} requested")

    def lump_mw(self, case: CaseStudy, selection: Selection) -> float:
        return _line(case, selection.line).lumps[selection.lump]

    def added_capacity(self, case: CaseStudy, line_id: int, year: int) -> float:
        """Capacity added to a line by the start of ``year`` (cumulative)."""
        s = self.selection(line_id)
        if s is None or s.year > year:
            return 0.0
        return self.lump_mw(case, s)

    def capacity_matrix(self, case: CaseStudy) -> np.ndarray:
        """Years x lines array of total capacity ``F0 + expansion built so far``."""
        caps = np.array([[line.existing_capacity for line in case.lines] for _ in case.years])
        for i, t in enumerate(case.years):
            for j, line in enumerate(case.lines):
                caps[i, j] += self.added_capacity(case, line.id, t)
        return caps

    def built(self, line_id: int, year: int) -> bool:
        """Investment indicator of a line in a year."""
        s = self.selection(line_id)
        return s is not None and s.year == year

    def cost_per_hour(self, case: CaseStudy) -> Dict[int, float]:
        """Investment cost charged in each year, per operating hour."""
        costs = {t: 0.0 for t in case.years}
        for s in self.selections:
            line = _line(case, s.line)
            costs[s.year] += line.fixed_cost + line.variable_cost * line.lumps[s.lump]
        return costs

    def expansion_by_line(self, case: CaseStudy) -> Dict[int, float]:
        """MW built per line over the horizon (0 for untouched lines)."""
        return {
            line.id: (line.lumps[s.lump] if (s := self.selection(line.id)) else 0.0)
            for line in case.lines
        }

    def total_mw(self, case: CaseStudy) -> float:
        return float(sum(self.lump_mw(case, s) for s in self.selections))

    def describe(self, case: CaseStudy) -> str:
        if self.is_empty:
            return 'no expansion'
        return ', '.join(
            f"line {s.line}: {self.lump_mw(case, s):g} MW in year {s.year}"
            for s in self.selections)

    def to_records(self, case: CaseStudy) -> Iterable[Dict[str, float]]:
        for s in self.selections:
            yield {'line': s.line, 'year': s.year, 'lump_mw': self.lump_mw(case, s)}


def _line(case: CaseStudy, line_id: int):
    try:
        return case.line(line_id)
    except KeyError:
        raise InvalidPlanError(f"Plan references unknown line {line_id}")
