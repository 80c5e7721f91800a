"""Solver backends: HiGHS through scipy, and any solver through pyomo."""

import logging
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple, Type

import numpy as np
import pyomo.environ as pyo
from pyomo.opt import TerminationCondition
from scipy import optimize, sparse

from .config import SolverSettings
from .exceptions import BackendError, BackendUnavailableError
from .model import ModelHandle, Sense
from .result import SolveResult, SolveStatus

logger = logging.getLogger(__name__)


class Backend(ABC):
    """Solves a ``ModelHandle``; subclasses always minimize internally."""

    name: str = ''

    def __init__(self, settings: SolverSettings):
        self.settings = settings

    @abstractmethod
    def solve(self, handle: ModelHandle) -> SolveResult:
        raise NotImplementedError

    @staticmethod
    def objective_sign(handle: ModelHandle) -> float:
        return -1.0 if handle.sense is Sense.MAXIMIZE else 1.0


class ScipyBackend(Backend):
    """HiGHS via ``scipy.optimize.linprog`` (LP) and ``scipy.optimize.milp`` (MILP)."""

    name = 'scipy'

    _LP_STATUS = {
        0: SolveStatus.OPTIMAL,
        1: SolveStatus.LIMIT,
        2: SolveStatus.INFEASIBLE,
        3: SolveStatus.UNBOUNDED,
    }

    def solve(self, handle: ModelHandle) -> SolveResult:
        if handle.is_mip:
            return self._solve_milp(handle)
        return self._solve_lp(handle)

    def _split_rows(self, handle: ModelHandle):
        a = handle.matrix
        le, eq, ge = handle.relations < 0, handle.relations == 0, handle.relations > 0
        ub_rows = np.flatnonzero(le | ge)
        row_sign = np.where(ge[ub_rows], -1.0, 1.0)
        a_ub, b_ub = None, None
        if ub_rows.size:
            a_ub = sparse.csr_array(a[ub_rows], copy=True)
            a_ub.data *= np.repeat(row_sign, np.diff(a_ub.indptr))
            b_ub = row_sign * handle.rhs[ub_rows]
        eq_rows = np.flatnonzero(eq)
        a_eq = a[eq_rows] if eq_rows.size else None
        b_eq = handle.rhs[eq_rows] if eq_rows.size else None
        return a_ub, b_ub, ub_rows, row_sign, a_eq, b_eq, eq_rows

    def _solve_lp(self, handle: ModelHandle) -> SolveResult:
        sign = self.objective_sign(handle)
        a_ub, b_ub, ub_rows, row_sign, a_eq, b_eq, eq_rows = self._split_rows(handle)
        options = {
            'primal_feasibility_tolerance': self.settings.lp_tol,
            'dual_feasibility_tolerance': self.settings.lp_tol,
            'presolve': True,
        }
        if self.settings.time_limit_s is not None:
            options['time_limit'] = self.settings.time_limit_s

        try:
            res = optimize.linprog(
                sign * handle.objective,
                A_ub=a_ub,
                b_ub=b_ub,
                A_eq=a_eq,
                b_eq=b_eq,
                bounds=np.column_stack((handle.lb, handle.ub)),
                method='highs',
                options=options,
            )
        except ValueError as e:
            raise BackendError(str(e), backend=self.name) from e

        if res.status not in self._LP_STATUS:
            raise BackendError(res.message, backend=self.name)
        status = self._LP_STATUS[res.status]
        if status is not SolveStatus.OPTIMAL:
            x = np.asarray(res.x) if res.x is not None else None
            return SolveResult(status=status, backend=self.name, x=x, message=res.message)

        duals = np.zeros(handle.n_rows)
        if ub_rows.size:
            duals[ub_rows] = sign * row_sign * np.asarray(res.ineqlin.marginals)
        if eq_rows.size:
            duals[eq_rows] = sign * np.asarray(res.eqlin.marginals)
        return SolveResult(
            status=status,
            backend=self.name,
            x=np.asarray(res.x),
            duals=duals,
            objective=sign * float(res.fun) + handle.objective_constant,
            gap=0.0,
            message=res.message,
        )

    def _solve_milp(self, handle: ModelHandle) -> SolveResult:
        sign = self.objective_sign(handle)
        lower = np.where(handle.relations < 0, -np.inf, handle.rhs)
        upper = np.where(handle.relations > 0, np.inf, handle.rhs)
        constraints = (
            optimize.LinearConstraint(handle.matrix, lower, upper) if handle.n_rows else None)
        options = {'mip_rel_gap': self.settings.mip_gap, 'disp': False, 'presolve': True}
        if self.settings.time_limit_s is not None:
            options['time_limit'] = self.settings.time_limit_s

        try:
            res = optimize.milp(
                sign * handle.objective,
                integrality=handle.integrality.astype(int),
                bounds=optimize.Bounds(handle.lb, handle.ub),
                constraints=constraints,
                options=options,
            )
        except ValueError as e:
            raise BackendError(str(e), backend=self.name) from e

        if res.status not in self._LP_STATUS:
            raise BackendError(res.message, backend=self.name)
        status = self._LP_STATUS[res.status]
        x = np.asarray(res.x) if res.x is not None else None
        objective = sign * float(res.fun) + handle.objective_constant if x is not None else None
        gap = getattr(res, 'mip_gap', None)
        return SolveResult(
            status=status,
            backend=self.name,
            x=x,
            objective=objective,
            gap=max(float(gap), 0.0) if gap is not None else None,
            message=res.message,
        )


class PyomoBackend(Backend):
    """Pyomo ``ConcreteModel`` handed to ``SolverFactory(settings.pyomo_solver)``."""

    name = 'pyomo'

    _TERMINATION = {
        TerminationCondition.optimal: SolveStatus.OPTIMAL,
        TerminationCondition.globallyOptimal: SolveStatus.OPTIMAL,
        TerminationCondition.locallyOptimal: SolveStatus.OPTIMAL,
        TerminationCondition.infeasible: SolveStatus.INFEASIBLE,
        TerminationCondition.infeasibleOrUnbounded: SolveStatus.INFEASIBLE,
        TerminationCondition.unbounded: SolveStatus.UNBOUNDED,
        TerminationCondition.maxTimeLimit: SolveStatus.LIMIT,
        TerminationCondition.maxIterations: SolveStatus.LIMIT,
        TerminationCondition.maxEvaluations: SolveStatus.LIMIT,
    }

    def _build(self, handle: ModelHandle) -> Tuple[pyo.ConcreteModel, Dict[int, object], bool]:
        """Translate the handle; returns the model, row map and trivial feasibility."""
        m = pyo.ConcreteModel(name=handle.name)
        m.I = pyo.RangeSet(0, handle.n_vars - 1) if handle.n_vars else pyo.Set(initialize=[])

        def _domain(model, j):
            return pyo.Binary if handle.integrality[j] else pyo.Reals

        def _bounds(model, j):
            lo, hi = handle.lb[j], handle.ub[j]
            return (None if np.isneginf(lo) else float(lo), None if np.isposinf(hi) else float(hi))

        m.x = pyo.Var(m.I, domain=_domain, bounds=_bounds)
        m.rows = pyo.ConstraintList()

        csr = handle.matrix
        row_map: Dict[int, object] = {}
        trivially_feasible = True
        for i in range(handle.n_rows):
            start, end = csr.indptr[i], csr.indptr[i + 1]
            rel, rhs = handle.relations[i], float(handle.rhs[i])
            if start == end:
                ok = (rel < 0 and rhs >= 0) or (rel > 0 and rhs <= 0) or (rel == 0 and rhs == 0)
                trivially_feasible &= ok
                continue
            expr = sum(float(v) * m.x[int(j)] for j, v in
                       zip(csr.indices[start:end], csr.data[start:end]))
            if rel < 0:
                row_map[i] = m.rows.add(expr <= rhs)
            elif rel > 0:
                row_map[i] = m.rows.add(expr >= rhs)
            else:
                row_map[i] = m.rows.add(expr == rhs)

        sign = self.objective_sign(handle)
        nonzero = np.flatnonzero(handle.objective)
        if nonzero.size:
            m.obj = pyo.Objective(
                expr=sum(sign * float(handle.objective[j]) * m.x[int(j)] for j in nonzero),
                sense=pyo.minimize)
        if not handle.is_mip:
            m.dual = pyo.Suffix(direction=pyo.Suffix.IMPORT)
        return m, row_map, trivially_feasible

    def _solver(self):
        solver = pyo.SolverFactory(self.settings.pyomo_solver)
        if solver is None or not solver.available(exception_flag=False):
            raise BackendUnavailableError(
                f"Pyomo solver '{self.settings.pyomo_solver}' is not available")
        return solver

    def _options(self) -> Dict[str, float]:
        if 'highs' not in self.settings.pyomo_solver:
            return {}
        return {
            'mip_rel_gap': self.settings.mip_gap,
            'primal_feasibility_tolerance': self.settings.lp_tol,
            'dual_feasibility_tolerance': self.settings.lp_tol,
        }

    def solve(self, handle: ModelHandle) -> SolveResult:
        m, row_map, trivially_feasible = self._build(handle)
        if not trivially_feasible:
            return SolveResult(
                status=SolveStatus.INFEASIBLE, backend=self.name,
                message='empty row with unsatisfiable right-hand side')
        solver = self._solver()

        kwargs = {'load_solutions': False, 'options': self._options()}
        if self.settings.time_limit_s is not None:
            kwargs['timelimit'] = self.settings.time_limit_s
        try:
            results = solver.solve(m, **kwargs)
        except Exception as e:
            raise BackendError(str(e), backend=self.name) from e

        condition = results.solver.termination_condition
        if condition not in self._TERMINATION:
            raise BackendError(
                f"Unexpected termination '{condition}': {results.solver.message}",
                backend=self.name)
        status = self._TERMINATION[condition]

        has_solution = len(results.solution) > 0
        if status in (SolveStatus.INFEASIBLE, SolveStatus.UNBOUNDED) or not has_solution:
            return SolveResult(status=status, backend=self.name, message=str(condition))
        m.solutions.load_from(results)

        x = np.array([pyo.value(m.x[j], exception=False) or 0.0 for j in m.I], dtype=float)
        sign = self.objective_sign(handle)
        objective = float(handle.objective @ x) + handle.objective_constant

        duals = None
        if not handle.is_mip and status is SolveStatus.OPTIMAL:
            duals = np.zeros(handle.n_rows)
            for i, con in row_map.items():
                duals[i] = sign * float(m.dual.get(con, 0.0))

        return SolveResult(
            status=status,
            backend=self.name,
            x=x,
            duals=duals,
            objective=objective,
            gap=self._gap(results) if handle.is_mip else 0.0,
            message=str(condition),
        )

    @staticmethod
    def _gap(results) -> Optional[float]:
        lower, upper = results.problem.lower_bound, results.problem.upper_bound
        try:
            lower, upper = float(lower), float(upper)
        except (TypeError, ValueError):
            return None
        if not (np.isfinite(lower) and np.isfinite(upper)):
            return None
        return abs(upper - lower) / max(1e-10, abs(upper))


BACKENDS: Dict[str, Type[Backend]] = {
    ScipyBackend.name: ScipyBackend,
    PyomoBackend.name: PyomoBackend,
}


def get_backend(settings: SolverSettings) -> Backend:
    try:
        return BACKENDS[settings.backend](settings)
    except KeyError:
        raise BackendUnavailableError(
            f"Unknown solver backend '{settings.backend}'; valid: {', '.join(BACKENDS)}")
