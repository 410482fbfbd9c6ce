"""Fine-grained lattice paths and their extended-probability weights.

A fine-grained history is one configuration index per grid time
``t_k = t0 + k dt``, ``k = 0..n_steps``. Its amplitude is the product of
exact one-step kernels ``<q_{k+1}|U|q_k>`` and its weight is

    w[q] = Re[ psi_f*(q_f) * amplitude * psi_0(q_0) ],   psi_f = U^n psi_0.

Weights sum to one over all paths but individual weights can be negative.
"""

from __future__ import annotations

import csv
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .errors import BasisMismatchError, EnumerationCapError
from .hilbert import ConfigBasis, StateVector, basis_of, step_matrices, total_evolution

# 8**7: a d = 8, n = 6 grid still enumerates
DEFAULT_MAX_PATHS = 2 ** 21


@dataclass(frozen=True)
class TimeGrid:
    n_steps: int
    dt: float
    basis: ConfigBasis

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")

    @property
    def n_paths(self) -> int:
        return self.basis.dim ** (self.n_steps + 1)

    def times(self, t0: float = 0.0) -> np.ndarray:
        return t0 + self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class FinePath:
    sites: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))

    def __len__(self) -> int:
        return len(self.sites)

    def __getitem__(self, k: int) -> int:
        return self.sites[k]

    def validate(self, grid: TimeGrid) -> None:
        if len(self.sites) != grid.n_steps + 1:
            raise BasisMismatchError(
                f"path has {len(self.sites)} sites, grid needs {grid.n_steps + 1}"
            )
        bad = [s for s in self.sites if not 0 <= s < grid.basis.dim]
        if bad:
            raise BasisMismatchError(f"path sites {bad} outside basis of dim {grid.basis.dim}")


@dataclass(frozen=True)
class PathWeight:
    path: FinePath
    amplitude: complex
    weight: float


def iter_paths(grid: TimeGrid) -> Iterator[FinePath]:
    """All paths in lexicographic order of ``(q0, ..., qn)``."""
    for sites in itertools.product(range(grid.basis.dim), repeat=grid.n_steps + 1):
        yield FinePath(sites)


def check_cap(n_paths: int, max_paths: int | None = None) -> None:
    cap = DEFAULT_MAX_PATHS if max_paths is None else max_paths
    if n_paths > cap:
        raise EnumerationCapError(n_paths, cap)


def path_amplitude(path: FinePath | Sequence[int], U) -> complex:
    """``prod_k <q_{k+1}|U_k|q_k>`` for a propagator or a per-step sequence."""
    sites = path.sites if isinstance(path, FinePath) else tuple(path)
    n = len(sites) - 1
    if n < 1:
        raise BasisMismatchError("a path needs at least two sites")
    try:
        steps = step_matrices(U, n)
    except BasisMismatchError as exc:
        raise BasisMismatchError(f"path length {len(sites)} does not match dynamics: {exc}")
    amp = 1 + 0j
    for k in range(n):
        amp = amp * complex(steps[k][sites[k + 1], sites[k]])
    return amp


def final_state(psi0: StateVector, U, n_steps: int) -> np.ndarray:
    return total_evolution(step_matrices(U, n_steps)) @ psi0.amplitudes


def fundamental_weight(path: FinePath | Sequence[int], psi0: StateVector, U) -> float:
    sites = path.sites if isinstance(path, FinePath) else tuple(path)
    amp = path_amplitude(sites, U)
    psi_f = final_state(psi0, U, len(sites) - 1)
    return float((np.conj(psi_f[sites[-1]]) * (amp * psi0.amplitudes[sites[0]])).real)


@dataclass(frozen=True, eq=False)
class PathTable:
    """Amplitudes and weights of every path, lexicographically ordered.

    Row ``i`` is the path whose sites are the base-``dim`` digits of ``i``.
    ``block_sums[q0]`` holds the compensated sum of weights with that initial site.
    """

    grid: TimeGrid
    amplitudes: np.ndarray
    weights: np.ndarray
    block_sums: np.ndarray

    @property
    def total(self) -> float:
        return kernels.neumaier_sum(self.block_sums)

    def sites(self) -> np.ndarray:
        """Integer array of shape ``(n_paths, n_steps + 1)``."""
        d, n = self.grid.basis.dim, self.grid.n_steps
        idx = np.arange(self.weights.shape[0])
        digits = [(idx // d ** (n - k)) % d for k in range(n + 1)]
        return np.stack(digits, axis=1)

    def site_column(self, k: int) -> np.ndarray:
        d, n = self.grid.basis.dim, self.grid.n_steps
        return (np.arange(self.weights.shape[0]) // d ** (n - k)) % d

    def class_weight(self, mask: np.ndarray) -> float:
        """Compensated sum of weights over the paths selected by ``mask``."""
        return kernels.neumaier_sum(self.weights[mask])

    def marginal(self, k: int, site: int) -> float:
        return self.class_weight(self.site_column(k) == site)

    def entry(self, path: FinePath | Sequence[int]) -> PathWeight:
        sites = path.sites if isinstance(path, FinePath) else tuple(path)
        i = 0
        for s in sites:
            i = i * self.grid.basis.dim + s
        return PathWeight(FinePath(sites), complex(self.amplitudes[i]), float(self.weights[i]))

    def write_csv(self, path) -> None:
        n = self.grid.n_steps
        sites = self.sites()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"q{k}" for k in range(n + 1)] + ["re_amp", "im_amp", "weight"])
            for row, amp, weight in zip(sites, self.amplitudes, self.weights):
                w.writerow(list(map(int, row)) + [f"{amp.real:.12g}", f"{amp.imag:.12g}",
                                                  f"{weight:.12g}"])


def weight_table(psi0: StateVector, U, grid: TimeGrid, max_paths: int | None = None,
                 workers: int = 1, backend: str | None = None) -> PathTable:
    """Enumerate all paths with their amplitudes and fundamental weights.

    Work is split by initial site; each block is summed with compensation and
    the block sums are reduced in initial-site order, so the result does not
    depend on ``workers``.
    """
    if psi0.basis.dim != grid.basis.dim or basis_of(U).dim != grid.basis.dim:
        raise BasisMismatchError("state, dynamics and grid must share a basis")
    check_cap(grid.n_paths, max_paths)
    kern = kernels.get_backend(backend)
    steps = np.ascontiguousarray(step_matrices(U, grid.n_steps))
    us_re, us_im = np.ascontiguousarray(steps.real), np.ascontiguousarray(steps.imag)
    psi_f = total_evolution(steps) @ psi0.amplitudes
    args = (us_re, us_im, psi0.amplitudes.real.copy(), psi0.amplitudes.imag.copy(),
            psi_f.real.copy(), psi_f.imag.copy())

    def block(q0):
        return kern.path_block(*args, q0)

    d = grid.basis.dim
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(block, range(d)))
    else:
        blocks = [block(q0) for q0 in range(d)]
    amps = np.concatenate([b[0] + 1j * b[1] for b in blocks])
    weights = np.concatenate([b[2] for b in blocks])
    block_sums = np.array([kern.neumaier_sum(b[2]) for b in blocks])
    return PathTable(grid, amps, weights, block_sums)


def total_weight(psi0: StateVector, U, grid: TimeGrid, max_paths: int | None = None,
                 workers: int = 1) -> float:
    return weight_table(psi0, U, grid, max_paths=max_paths, workers=workers).total


def sample_surrogate_real_history(psi0: StateVector, U, grid: TimeGrid,
                                  seed: int) -> FinePath:
    """Draw a path from sequential projective position measurement.

    ``q0 ~ |psi0|^2``, then ``q_{k+1} ~ |<q_{k+1}|U_k|q_k>|^2``. This is a
    stand-in for the single real history, used for typicality diagnostics.
    """
    rng = np.random.default_rng(seed)
    steps = step_matrices(U, grid.n_steps)
    d = grid.basis.dim

    def draw(probs):
        probs = np.clip(probs, 0.0, None)
        return int(rng.choice(d, p=probs / probs.sum()))

    sites = [draw(psi0.probabilities())]
    for k in range(grid.n_steps):
        sites.append(draw(np.abs(steps[k][:, sites[-1]]) ** 2))
    return FinePath(tuple(sites))
