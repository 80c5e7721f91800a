"""Backend-neutral LP/MILP building and solving."""

from .backends import BACKENDS, Backend, PyomoBackend, ScipyBackend, get_backend
from .config import SolverSettings, resolve_settings
from .exceptions import BackendError, BackendUnavailableError, ModelSpecError, SolverError
from .model import ModelHandle, ModelSpec, Relation, Sense, VarKind, build_model, fix_variables
from .solve import optimize
from .result import KKTResiduals, SolveResult, SolveStatus, check_lp_optimality

__version__ = "1.0.0"
__all__ = [
    "BACKENDS",
    "Backend",
    "PyomoBackend",
    "ScipyBackend",
    "get_backend",
    "SolverSettings",
    "resolve_settings",
    "BackendError",
    "BackendUnavailableError",
    "ModelSpecError",
    "SolverError",
    "ModelHandle",
    "ModelSpec",
    "Relation",
    "Sense",
    "VarKind",
    "build_model",
    "fix_variables",
    "optimize",
    "KKTResiduals",
    "SolveResult",
    "SolveStatus",
    "check_lp_optimality",
]
