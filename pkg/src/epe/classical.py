"""Finite classical ensemble: the statistical-mechanics column of the comparison table.

Phase space is ``{0, ..., M-1}`` and the dynamics a permutation applied once
per step, so each initial point has exactly one orbit. A path's weight is
``rho0(z0)`` when it is the orbit of its own initial point and zero otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidFamilyError


@dataclass(frozen=True, eq=False)
class ClassicalEnsemble:
    phase_dim: int
    dynamics: np.ndarray
    rho0: np.ndarray
    n_steps: int = 1

    def __post_init__(self):
        perm = np.asarray(self.dynamics, dtype=int)
        rho = np.asarray(self.rho0, dtype=float)
        if perm.shape != (self.phase_dim,) or sorted(perm.tolist()) != list(range(self.phase_dim)):
            raise ValueError("dynamics must be a permutation of the phase-space indices")
        if rho.shape != (self.phase_dim,) or rho.min() < 0:
            raise ValueError("rho0 must be a nonnegative vector over phase space")
        if abs(math.fsum(rho) - 1.0) > 1e-12:
            raise ValueError(f"rho0 sums to {math.fsum(rho):.15g}, not 1")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        object.__setattr__(self, "dynamics", perm)
        object.__setattr__(self, "rho0", rho)

    def orbit(self, z0: int) -> tuple[int, ...]:
        out = [int(z0)]
        for _ in range(self.n_steps):
            out.append(int(self.dynamics[out[-1]]))
        return tuple(out)

    def orbits(self) -> np.ndarray:
        """Array ``(phase_dim, n_steps + 1)``; row ``z0`` is the orbit of ``z0``."""
        return np.array([self.orbit(z) for z in range(self.phase_dim)])


def classical_weight(path: Sequence[int], ens: ClassicalEnsemble) -> float:
    path = tuple(int(z) for z in path)
    if len(path) != ens.n_steps + 1:
        raise ValueError(f"path has {len(path)} points, ensemble needs {ens.n_steps + 1}")
    return float(ens.rho0[path[0]]) if ens.orbit(path[0]) == path else 0.0


def all_classical_weights(ens: ClassicalEnsemble) -> np.ndarray:
    """Weights of every path in lexicographic order (``phase_dim ** (n_steps+1)`` entries)."""
    return np.array([classical_weight(p, ens)
                     for p in itertools.product(range(ens.phase_dim), repeat=ens.n_steps + 1)])


def _check_cells(cells, dim, k):
    flat = sorted(i for c in cells for i in c)
    if flat != list(range(dim)):
        raise InvalidFamilyError(f"cells at time {k} are not an exhaustive, exclusive partition")


def classical_coarse_probability(chain: Sequence[tuple[int, Sequence[Sequence[int]]]],
                                 ens: ClassicalEnsemble) -> tuple[list[tuple], np.ndarray]:
    """Probabilities of histories defined by cells at selected times (``0..n_steps``).

    Returns ``(labels, probs)`` with labels in lexicographic order; each value
    is the total ``rho0`` of orbits passing through the label's cells.
    """
    owners = []
    for k, cells in chain:
        if not 0 <= k <= ens.n_steps:
            raise InvalidFamilyError(f"time {k} outside 0..{ens.n_steps}")
        _check_cells(cells, ens.phase_dim, k)
        own = np.empty(ens.phase_dim, dtype=int)
        for a, c in enumerate(cells):
            own[list(c)] = a
        owners.append((k, own, len(cells)))
    labels = list(itertools.product(*[range(m) for _, _, m in owners]))
    index = {lab: i for i, lab in enumerate(labels)}
    parts: list[list[float]] = [[] for _ in labels]
    orbits = ens.orbits()
    for z0 in range(ens.phase_dim):
        lab = tuple(int(own[orbits[z0, k]]) for k, own, _ in owners)
        parts[index[lab]].append(float(ens.rho0[z0]))
    return labels, np.array([math.fsum(p) for p in parts])


def table_comparison(quantum: dict, classical: dict) -> dict:
    """Pair each row of the classical/quantum ensemble table with computed quantities.

    ``quantum`` and ``classical`` are the per-column summaries produced by the
    CLI (weights, totals, coarse probabilities). Negativity is flagged from the
    computed minima, settleability from the column's structural rule.
    """
    def column(summary, settleable, fine_settleable):
        min_w = float(summary["min_weight"])
        probs = [float(p) for p in summary.get("coarse_probabilities", [])]
        return {
            "real_fine_grained_history": summary.get("real_history"),
            "ensemble_size": summary.get("n_paths"),
            "fundamental_distribution": {
                "min_weight": min_w,
                "max_weight": float(summary["max_weight"]),
                "n_negative": int(summary.get("n_negative", 0)),
                "negative": min_w < -1e-12,
            },
            "normalization": float(summary["total_weight"]),
            "coarse_grained_probabilities": probs,
            "coarse_grained_standard": all(-1e-12 <= p <= 1 + 1e-12 for p in probs),
            "settleable_sets": settleable,
            "fine_grained_settleable": fine_settleable,
            "betting_instructions": ("use probabilities" if min_w >= -1e-12
                                     else "don't bet on sets with non-standard probabilities"),
        }

    return {
        "classical": column(classical, "in principle all coarse-grained sets", True),
        "quantum": column(quantum, "recorded coarse-grained sets only", False),
    }


def classical_summary(ens: ClassicalEnsemble, chain=None, real_z0: int | None = None) -> dict:
    w = all_classical_weights(ens)
    out = {
        "n_paths": int(w.size),
        "total_weight": math.fsum(w),
        "min_weight": float(w.min()),
        "max_weight": float(w.max()),
        "n_negative": int((w < 0).sum()),
    }
    if chain:
        labels, probs = classical_coarse_probability(chain, ens)
        out["coarse_labels"] = [list(lab) for lab in labels]
        out["coarse_probabilities"] = [float(p) for p in probs]
    if real_z0 is not None:
        out["real_history"] = list(ens.orbit(real_z0))
    return out
