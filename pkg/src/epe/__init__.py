"""Extended probabilities for fine-grained and coarse-grained quantum histories."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .hilbert import (ConfigBasis, Hamiltonian, ProjectorFamily, Propagator,  # noqa: E402
                      StateVector, build_propagator, evolve, heisenberg_state)
from .paths import FinePath, TimeGrid, fundamental_weight, weight_table  # noqa: E402
from .histories import ChainSpec, HistorySet, build_history_set, coarse_grain  # noqa: E402
from .kernels import BACKEND  # noqa: E402
