"""Backend-neutral linear model specification.

Variables and constraints are added in named blocks; the resulting
``ModelHandle`` stores the model in matrix form (sparse constraint matrix,
bounds, relations, objective) so every backend reads the same data in the
same order.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from .exceptions import ModelSpecError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


class VarKind(str, Enum):
    CONTINUOUS = 'continuous'
    BINARY = 'binary'


class Relation(str, Enum):
    LE = '<='
    EQ = '=='
    GE = '>='


class Sense(str, Enum):
    MINIMIZE = 'min'
    MAXIMIZE = 'max'


_RELATION_CODE = {Relation.LE: -1, Relation.EQ: 0, Relation.GE: 1}


class ModelSpec:
    """Incremental builder for a linear model.

    Example:
        >>> spec = ModelSpec('demo')
        >>> x = spec.add_variables('x', lb=-np.inf)
        >>> spec.add_constraint({int(x[0]): 1.0}, Relation.LE, 3.0, 'cap')
        >>> spec.set_objective({int(x[0]): 1.0}, Sense.MAXIMIZE)
        >>> handle = build_model(spec)
    """

    def __init__(self, name: str = 'model'):
        self.name = name
        self._kinds: List[np.ndarray] = []
        self._lbs: List[np.ndarray] = []
        self._ubs: List[np.ndarray] = []
        self._n_vars = 0
        self._var_blocks: Dict[str, np.ndarray] = {}

        self._rows: List[np.ndarray] = []
        self._cols: List[np.ndarray] = []
        self._vals: List[np.ndarray] = []
        self._relations: List[np.ndarray] = []
        self._rhs: List[np.ndarray] = []
        self._n_rows = 0
        self._row_blocks: Dict[str, np.ndarray] = {}

        self._objective: Dict[int, float] = {}
        self.sense = Sense.MINIMIZE
        self.objective_constant = 0.0

    @property
    def n_vars(self) -> int:
        return self._n_vars

    @property
    def n_rows(self) -> int:
        return self._n_rows

    def add_variables(
        self,
        name: str,
        count: int = 1,
        kind: VarKind = VarKind.CONTINUOUS,
        lb: ArrayLike = 0.0,
        ub: ArrayLike = np.inf,
    ) -> np.ndarray:
        """Register a block of variables.

        Args:
            name: Block name; must be unique.
            count: Number of variables in the block.
            kind: Continuous or binary.
            lb: Lower bound(s); ``-np.inf`` declares the variable free below.
            ub: Upper bound(s); ``np.inf`` declares it free above.

        Returns:
            Global indices of the new variables.
        """
        if name in self._var_blocks:
            raise ModelSpecError(f"Duplicate variable block '{name}'")
        if count < 0:
            raise ModelSpecError(f"Negative size for variable block '{name}'")
        lb_arr = np.broadcast_to(np.asarray(lb, dtype=float), (count,)).copy()
        ub_arr = np.broadcast_to(np.asarray(ub, dtype=float), (count,)).copy()
        indices = np.arange(self._n_vars, self._n_vars + count)
        self._kinds.append(np.full(count, kind is VarKind.BINARY))
        self._lbs.append(lb_arr)
        self._ubs.append(ub_arr)
        self._var_blocks[name] = indices
        self._n_vars += count
        return indices

    def add_constraints(
        self,
        name: str,
        rows: ArrayLike,
        cols: ArrayLike,
        vals: ArrayLike,
        relation: Relation,
        rhs: ArrayLike,
        count: Optional[int] = None,
    ) -> np.ndarray:
        """Register a block of constraints in coordinate form.

        Args:
            name: Block name; must be unique.
            rows: Row positions local to the block (0-based).
            cols: Global variable indices.
            vals: Coefficients.
            relation: Relation shared by every row of the block.
            rhs: Right-hand side(s).
            count: Number of rows; defaults to ``len(rhs)`` or ``max(rows)+1``.

        Returns:
            Global indices of the new rows.
        """
        if name in self._row_blocks:
            raise ModelSpecError(f"Duplicate constraint block '{name}'")
        rows_arr = np.asarray(rows, dtype=int).ravel()
        cols_arr = np.asarray(cols, dtype=int).ravel()
        vals_arr = np.broadcast_to(np.asarray(vals, dtype=float), rows_arr.shape).copy()
        if rows_arr.shape != cols_arr.shape:
            raise ModelSpecError(f"Block '{name}': rows and cols differ in length")
        if count is None:
            rhs_given = np.asarray(rhs, dtype=float)
            if rhs_given.ndim > 0:
                count = len(rhs_given)
            else:
                count = int(rows_arr.max()) + 1 if rows_arr.size else 0
        if rows_arr.size and (rows_arr.min() < 0 or rows_arr.max() >= count):
            raise ModelSpecError(f"Block '{name}': row position outside block")
        rhs_arr = np.broadcast_to(np.asarray(rhs, dtype=float), (count,)).copy()

        self._rows.append(rows_arr + self._n_rows)
        self._cols.append(cols_arr)
        self._vals.append(vals_arr)
        self._relations.append(np.full(count, _RELATION_CODE[Relation(relation)], dtype=int))
        self._rhs.append(rhs_arr)
        indices = np.arange(self._n_rows, self._n_rows + count)
        self._row_blocks[name] = indices
        self._n_rows += count
        return indices

    def add_constraint(
        self,
        terms: Mapping[int, float],
        relation: Relation,
        rhs: float,
        name: str,
    ) -> int:
        """Register a single constraint ``sum(coef * x[var]) <relation> rhs``."""
        cols = list(terms.keys())
        vals = [terms[c] for c in cols]
        return int(self.add_constraints(
            name, np.zeros(len(cols), dtype=int), cols, vals, relation, [rhs], count=1)[0])

    def set_objective(
        self,
        terms: Union[Mapping[int, float], Tuple[ArrayLike, ArrayLike]],
        sense: Sense = Sense.MINIMIZE,
        constant: float = 0.0,
    ) -> None:
        """Set the linear objective.

        Args:
            terms: ``{var: coef}`` or ``(vars, coefs)`` arrays; repeated
                variables are summed.
            sense: Optimization direction.
            constant: Constant offset added to the objective value.
        """
        self._objective = {}
        self.add_objective_terms(terms)
        self.sense = Sense(sense)
        self.objective_constant = float(constant)

    def add_objective_terms(
        self, terms: Union[Mapping[int, float], Tuple[ArrayLike, ArrayLike]]
    ) -> None:
        if isinstance(terms, Mapping):
            pairs = terms.items()
        else:
            cols, vals = terms
            cols = np.asarray(cols, dtype=int).ravel()
            pairs = zip(cols, np.broadcast_to(np.asarray(vals, dtype=float), cols.shape))
        for col, val in pairs:
            self._objective[int(col)] = self._objective.get(int(col), 0.0) + float(val)

    def var_block(self, name: str) -> np.ndarray:
        return self._var_blocks[name]

    def row_block(self, name: str) -> np.ndarray:
        return self._row_blocks[name]


@dataclass(frozen=True)
class ModelHandle:
    """Immutable, validated model in matrix form.

    Attributes:
        integrality: True for binary variables.
        relations: -1 for ``<=``, 0 for ``==``, +1 for ``>=`` per row.
        var_blocks: Block name to global variable indices.
        row_blocks: Block name to global row indices.
    """
    name: str
    matrix: sparse.csr_array
    lb: np.ndarray
    ub: np.ndarray
    integrality: np.ndarray
    relations: np.ndarray
    rhs: np.ndarray
    objective: np.ndarray
    sense: Sense
    objective_constant: float = 0.0
    var_blocks: Dict[str, np.ndarray] = field(default_factory=dict)
    row_blocks: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.lb)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    @property
    def n_binaries(self) -> int:
        return int(self.integrality.sum())

    @property
    def is_mip(self) -> bool:
        return bool(self.integrality.any())

    def var_block(self, name: str) -> np.ndarray:
        return self.var_blocks[name]

    def row_block(self, name: str) -> np.ndarray:
        return self.row_blocks[name]

    def statistics(self) -> Dict[str, int]:
        return {
            'variables': self.n_vars,
            'constraints': self.n_rows,
            'binaries': self.n_binaries,
            'nonzeros': int(self.matrix.nnz),
        }


def build_model(spec: ModelSpec) -> ModelHandle:
    """Validate a specification and freeze it into a handle.

    Args:
        spec: Populated model specification.

    Returns:
        Handle ready for ``optimize``; variable order is registration order.

    Raises:
        ModelSpecError: On unknown variables, NaN data or crossed bounds.
    """
    n, m = spec.n_vars, spec.n_rows
    lb = np.concatenate(spec._lbs) if spec._lbs else np.zeros(0)
    ub = np.concatenate(spec._ubs) if spec._ubs else np.zeros(0)
    integrality = np.concatenate(spec._kinds) if spec._kinds else np.zeros(0, dtype=bool)
    rows = np.concatenate(spec._rows) if spec._rows else np.zeros(0, dtype=int)
    cols = np.concatenate(spec._cols) if spec._cols else np.zeros(0, dtype=int)
    vals = np.concatenate(spec._vals) if spec._vals else np.zeros(0)
    relations = np.concatenate(spec._relations) if spec._relations else np.zeros(0, dtype=int)
    rhs = np.concatenate(spec._rhs) if spec._rhs else np.zeros(0)

    if cols.size and (cols.min() < 0 or cols.max() >= n):
        bad = int(cols[(cols < 0) | (cols >= n)][0])
        raise ModelSpecError(f"Constraint references unregistered variable {bad} (model has {n})")
    for label, data in (('coefficient', vals), ('right-hand side', rhs)):
        if np.isnan(data).any() or np.isinf(data).any():
            raise ModelSpecError(f"Non-finite {label} in model '{spec.name}'")
    if np.isnan(lb).any() or np.isnan(ub).any():
        raise ModelSpecError(f"NaN bound in model '{spec.name}'")
    if (lb > ub).any():
        raise ModelSpecError(f"Lower bound above upper bound in model '{spec.name}'")
    if integrality.any() and ((lb[integrality] < 0) | (ub[integrality] > 1)).any():
        raise ModelSpecError(f"Binary variable with bounds outside [0, 1] in '{spec.name}'")

    objective = np.zeros(n)
    for col, val in spec._objective.items():
        if col < 0 or col >= n:
            raise ModelSpecError(f"Objective references unregistered variable {col}")
        if not np.isfinite(val):
            raise ModelSpecError(f"Non-finite objective coefficient on variable {col}")
        objective[col] = val

    matrix = sparse.csr_array(sparse.coo_array((vals, (rows, cols)), shape=(m, n)))
    matrix.sum_duplicates()
    handle = ModelHandle(
        name=spec.name,
        matrix=matrix,
        lb=lb,
        ub=ub,
        integrality=integrality,
        relations=relations,
        rhs=rhs,
        objective=objective,
        sense=spec.sense,
        objective_constant=spec.objective_constant,
        var_blocks=dict(spec._var_blocks),
        row_blocks=dict(spec._row_blocks),
    )
    logger.info(f"Built model '{spec.name}': {handle.statistics()}")
    return handle


def fix_variables(
    handle: ModelHandle, indices: ArrayLike, values: ArrayLike, name: Optional[str] = None
) -> ModelHandle:
    """Return a copy of the model with chosen variables fixed.

    Fixed binaries become continuous, so fixing every binary turns a MILP
    into an LP with duals.

    Args:
        handle: Source model.
        indices: Variables to fix.
        values: Values to fix them at.
        name: Name of the new model.

    Returns:
        New handle; the source is unchanged.
    """
    idx = np.asarray(indices, dtype=int).ravel()
    vals = np.broadcast_to(np.asarray(values, dtype=float), idx.shape)
    if idx.size and (idx.min() < 0 or idx.max() >= handle.n_vars):
        raise ModelSpecError('fix_variables got an unregistered variable')
    lb, ub, integrality = handle.lb.copy(), handle.ub.copy(), handle.integrality.copy()
    lb[idx] = vals
    ub[idx] = vals
    integrality[idx] = False
    return replace(
        handle, name=name or f'{handle.name}[fixed]', lb=lb, ub=ub, integrality=integrality)
