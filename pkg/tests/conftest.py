import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from epe.hilbert import ConfigBasis, Hamiltonian, StateVector, build_propagator  # noqa: E402


@pytest.fixture
def fixq2():
    """Qubit, U = exp(-i X pi/8), psi0 = |0>, two steps."""
    basis = ConfigBasis(2)
    H = Hamiltonian(basis, np.array([[0, 1], [1, 0]], dtype=complex))
    U = build_propagator(H, math.pi / 8)
    psi0 = StateVector.basis_state(basis, 0)
    return basis, U, psi0


def hopping(d: int) -> np.ndarray:
    H = np.zeros((d, d), dtype=complex)
    for i in range(d - 1):
        H[i, i + 1] = H[i + 1, i] = -1
    return H


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
