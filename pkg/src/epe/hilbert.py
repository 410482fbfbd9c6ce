"""Finite-dimensional Hilbert space primitives.

Everything here lives on a configuration basis ``{0, ..., dim-1}``. Units
have hbar = 1, so a propagator over a step ``dt`` is ``exp(-i H dt)``.
Projector families are partitions of the basis indices, i.e. diagonal
projectors onto ranges of the configuration variable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import BasisMismatchError, InvalidFamilyError, NonHermitianError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
NORM_TOL = 1e-12


@dataclass(frozen=True)
class ConfigBasis:
    dim: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError(f"basis dimension must be >= 1, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        if self.labels is not None:
            labels = tuple(str(lab) for lab in self.labels)
            if len(labels) != self.dim:
                raise ValueError(
                    f"{len(labels)} labels given for a basis of dimension {self.dim}"
                )
            object.__setattr__(self, "labels", labels)

    def label(self, index: int) -> str:
        return self.labels[index] if self.labels else str(index)


def _frozen(array, dtype=complex) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _check_basis(a: ConfigBasis, b: ConfigBasis) -> None:
    if a.dim != b.dim:
        raise BasisMismatchError(f"basis dimensions differ: {a.dim} vs {b.dim}")


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: ConfigBasis
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape[0] != self.basis.dim:
            raise BasisMismatchError(
                f"state has {amps.shape[0]} amplitudes, basis has dim {self.basis.dim}"
            )
        object.__setattr__(self, "amplitudes", amps)
        if self.normalized and abs(self.norm() - 1.0) > NORM_TOL:
            raise ValueError(f"state flagged normalized has norm {self.norm():.15g}")

    @classmethod
    def basis_state(cls, basis: ConfigBasis, index: int) -> "StateVector":
        amps = np.zeros(basis.dim, dtype=complex)
        amps[index] = 1.0
        return cls(basis, amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, basis: ConfigBasis | None = None,
                        normalize: bool = True) -> "StateVector":
        """Build a state, rescaling to unit norm when ``normalize`` is set."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if basis is None:
            basis = ConfigBasis(amps.shape[0])
        if normalize:
            nrm = np.linalg.norm(amps)
            if nrm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / nrm
        return cls(basis, amps, normalized=normalize)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "StateVector") -> complex:
        _check_basis(self.basis, other.basis)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def hermiticity_defect(matrix: np.ndarray) -> float:
    matrix = np.asarray(matrix)
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


def unitarity_defect(matrix: np.ndarray) -> float:
    matrix = np.asarray(matrix)
    eye = np.eye(matrix.shape[0])
    return float(np.max(np.abs(matrix.conj().T @ matrix - eye)))


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    basis: ConfigBasis
    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.matrix)
        d = self.basis.dim
        if mat.shape != (d, d):
            raise BasisMismatchError(f"Hamiltonian shape {mat.shape} != ({d}, {d})")
        defect = hermiticity_defect(mat)
        if defect > HERMITIAN_TOL:
            raise NonHermitianError(defect)
        object.__setattr__(self, "matrix", mat)

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        _check_basis(self.basis, other.basis)
        return Hamiltonian(self.basis, self.matrix + other.matrix)


@dataclass(frozen=True, eq=False)
class Propagator:
    """One-step unitary kernel ``exp(-i H dt)``."""

    basis: ConfigBasis
    step: float
    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.matrix)
        d = self.basis.dim
        if mat.shape != (d, d):
            raise BasisMismatchError(f"propagator shape {mat.shape} != ({d}, {d})")
        defect = unitarity_defect(mat)
        if defect > UNITARY_TOL:
            raise ValueError(f"propagator is not unitary: max |U^dag U - I| = {defect:.3e}")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_unitary(cls, matrix, basis: ConfigBasis | None = None,
                     step: float = float("nan")) -> "Propagator":
        matrix = np.asarray(matrix, dtype=complex)
        return cls(basis or ConfigBasis(matrix.shape[0]), step, matrix)

    @property
    def dagger(self) -> "Propagator":
        return Propagator(self.basis, -self.step, self.matrix.conj().T)


def build_propagator(H: Hamiltonian, dt: float) -> Propagator:
    """Exact propagator ``exp(-i H dt)`` from the Hermitian eigendecomposition."""
    defect = hermiticity_defect(H.matrix)
    if defect > HERMITIAN_TOL:
        raise NonHermitianError(defect)
    evals, evecs = np.linalg.eigh(H.matrix)
    phases = np.exp(-1j * evals * dt)
    return Propagator(H.basis, float(dt), (evecs * phases) @ evecs.conj().T)


def _matrix_power(matrix: np.ndarray, n: int) -> np.ndarray:
    return np.linalg.matrix_power(matrix, n) if n else np.eye(matrix.shape[0], dtype=complex)


def evolve(psi: StateVector, U: Propagator, n_steps: int) -> StateVector:
    _check_basis(psi.basis, U.basis)
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative; use U.dagger for reverse evolution")
    amps = psi.amplitudes
    for _ in range(n_steps):
        amps = U.matrix @ amps
    return StateVector(psi.basis, amps, normalized=psi.normalized)


def heisenberg_state(psi_t0: StateVector, U: Propagator, n_total: int) -> StateVector:
    """Return ``exp(+i H (t_f - t0)) psi(t0)``: ``n_total`` applications of U^dagger.

    Class operators produced by :func:`epe.histories.to_heisenberg` are
    referred to ``t0`` and pair with ``psi(t0)`` itself; this is the state
    carried back from the final time.
    """
    return evolve(psi_t0, U.dagger, n_total)


@dataclass(frozen=True)
class ProjectorFamily:
    """Exhaustive, exclusive diagonal projectors given as a partition of indices."""

    basis: ConfigBasis
    cells: tuple[tuple[int, ...], ...]
    _cell_of: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cells = tuple(tuple(sorted(int(i) for i in cell)) for cell in self.cells)
        d = self.basis.dim
        owner = [-1] * d
        for c, cell in enumerate(cells):
            if not cell:
                raise InvalidFamilyError(f"cell {c} is empty")
            for i in cell:
                if not 0 <= i < d:
                    raise InvalidFamilyError(f"cell {c} has index {i} outside basis of dim {d}")
                if owner[i] != -1:
                    raise InvalidFamilyError(
                        f"index {i} appears in cells {owner[i]} and {c}; cells must be disjoint"
                    )
                owner[i] = c
        missing = [i for i, o in enumerate(owner) if o == -1]
        if missing:
            raise InvalidFamilyError(f"cells are not exhaustive; uncovered indices {missing}")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "_cell_of", tuple(owner))

    @classmethod
    def whole(cls, basis: ConfigBasis) -> "ProjectorFamily":
        return cls(basis, (tuple(range(basis.dim)),))

    @classmethod
    def fine(cls, basis: ConfigBasis) -> "ProjectorFamily":
        return cls(basis, tuple((i,) for i in range(basis.dim)))

    @classmethod
    def two_cell(cls, basis: ConfigBasis, cell: Sequence[int]) -> "ProjectorFamily":
        """``{cell, rest}``; the rest cell is omitted when ``cell`` is everything."""
        inside = tuple(sorted(set(int(i) for i in cell)))
        rest = tuple(i for i in range(basis.dim) if i not in inside)
        return cls(basis, (inside, rest) if rest else (inside,))

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def cell_of(self) -> tuple[int, ...]:
        """Map from basis index to the index of the cell containing it."""
        return self._cell_of

    def mask(self, alpha: int) -> np.ndarray:
        m = np.zeros(self.basis.dim, dtype=bool)
        m[list(self.cells[alpha])] = True
        return m

    def projector(self, alpha: int) -> np.ndarray:
        return np.diag(self.mask(alpha).astype(complex))

    def apply(self, alpha: int, x: np.ndarray) -> np.ndarray:
        """``P_alpha @ x`` for a vector or matrix, computed by masking rows."""
        out = np.zeros_like(x)
        idx = list(self.cells[alpha])
        out[idx] = x[idx]
        return out


Tensorable = Union[StateVector, Hamiltonian, ProjectorFamily]


def _product_basis(a: ConfigBasis, b: ConfigBasis) -> ConfigBasis:
    labels = None
    if a.labels or b.labels:
        labels = tuple(f"{a.label(i)},{b.label(j)}" for i in range(a.dim) for j in range(b.dim))
    return ConfigBasis(a.dim * b.dim, labels)


def tensor(a: Tensorable, b: Tensorable) -> Tensorable:
    """Kronecker product on the product basis, first factor's index major."""
    if type(a) is not type(b):
        raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    basis = _product_basis(a.basis, b.basis)
    if isinstance(a, StateVector):
        return StateVector(basis, np.kron(a.amplitudes, b.amplitudes),
                           normalized=a.normalized and b.normalized)
    if isinstance(a, Hamiltonian):
        return Hamiltonian(basis, np.kron(a.matrix, b.matrix))
    db = b.basis.dim
    cells = tuple(
        tuple(i * db + j for i in ca for j in cb) for ca in a.cells for cb in b.cells
    )
    return ProjectorFamily(basis, cells)


def identity_hamiltonian(basis: ConfigBasis) -> Hamiltonian:
    return Hamiltonian(basis, np.eye(basis.dim, dtype=complex))


def zero_hamiltonian(basis: ConfigBasis) -> Hamiltonian:
    return Hamiltonian(basis, np.zeros((basis.dim, basis.dim), dtype=complex))


def step_matrices(U, n_steps: int) -> np.ndarray:
    """Stack of per-step kernels, shape ``(n_steps, d, d)``.

    ``U`` is either one :class:`Propagator` used at every step or a sequence
    of ``n_steps`` propagators (step ``k`` maps time ``k`` to ``k + 1``).
    """
    if isinstance(U, Propagator):
        return np.broadcast_to(U.matrix, (n_steps,) + U.matrix.shape).copy()
    seq = list(U)
    if len(seq) != n_steps:
        raise BasisMismatchError(f"{len(seq)} step propagators given for {n_steps} steps")
    return np.stack([u.matrix for u in seq])


def basis_of(U) -> ConfigBasis:
    return U.basis if isinstance(U, Propagator) else next(iter(U)).basis


def total_evolution(steps: np.ndarray, upto: int | None = None) -> np.ndarray:
    """``U_{k-1} ... U_0`` for ``k = upto`` (default: all steps)."""
    d = steps.shape[-1]
    out = np.eye(d, dtype=complex)
    for k in range(steps.shape[0] if upto is None else upto):
        out = steps[k] @ out
    return out
