"""Default parameters for case studies and their generators."""

from typing import Tuple

# Policy
DEFAULT_KAPPA: float = 1.0
DEFAULT_BIG_M: float = 3000.0

# Network
DEFAULT_THETA_MAX: float = 0.5
DEFAULT_BASE_MVA: float = 100.0

# Horizon
DEFAULT_PSI: float = 8760.0
DEFAULT_DISCOUNT_RATE: float = 0.01

# Expansion menu shared by both shipped cases
DEFAULT_LUMPS: Tuple[float, ...] = tuple(float(mw) for mw in range(1, 401))
DEFAULT_K_FIX: float = 100.0
DEFAULT_K_VAR: float = 5.0

GARVER_DATA_FILE: str = 'garver6.json'
GENERATOR_NAMES: Tuple[str, ...] = ('two_node', 'garver6')

# Agents per node of the full-size Garver population; smaller populations
# scale network ratings, lumps and fixed costs by agents / this value
GARVER_REFERENCE_AGENTS: int = 1000
