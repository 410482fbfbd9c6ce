"""Typicality of the real history and adversarial coarse grainings.

A coarse-grained history ``r`` is typical when ``-log p(r)`` is small next
to the entropy ``S = -sum p log p`` of the set (natural log). The searches
below look for two-cell partitions ``{cell containing the real value, rest}``
under which the real history is as improbable as possible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import BasisMismatchError, TypicalityUndefinedError
from .paths import FinePath, PathTable, TimeGrid, weight_table

NEG_TOL = 1e-12
SUM_TOL = 1e-9
ZERO_WITNESS = 1e-10


@dataclass(frozen=True)
class TypicalityReport:
    surprisal: float
    entropy: float
    ratio: float
    typical: bool
    theta: float

    def as_dict(self) -> dict:
        return {"surprisal": self.surprisal, "entropy": self.entropy, "ratio": self.ratio,
                "typical": self.typical, "theta": self.theta}


def entropy(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p))) if p.size else 0.0


def typicality_report(probs: Sequence[float], real_index: int,
                      theta: float = 1.0) -> TypicalityReport:
    """Compare the surprisal of ``probs[real_index]`` with the entropy of ``probs``.

    Zero entropy with zero surprisal counts as typical; ``p(r) = 0`` gives an
    infinite surprisal and is atypical.
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or not 0 <= real_index < p.size:
        raise ValueError(f"real index {real_index} not valid for {p.size} probabilities")
    if p.min() < -NEG_TOL:
        raise TypicalityUndefinedError(
            f"extended-probability set (min p = {p.min():.3e}): typicality undefined"
        )
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise ValueError(f"probabilities sum to {p.sum():.12g}, not 1")
    p = np.clip(p, 0.0, None)
    S = entropy(p)
    pr = p[real_index]
    surprisal = math.inf if pr == 0 else -math.log(pr)
    if S > 0:
        ratio = surprisal / S
    else:
        ratio = 0.0 if surprisal == 0 else math.inf
    # relative slack keeps uniform sets on the boundary despite rounding
    typical = math.isfinite(surprisal) and surprisal <= theta * S + 1e-12 * max(1.0, S)
    return TypicalityReport(surprisal, S, ratio, typical, theta)


@dataclass(frozen=True)
class Candidate:
    """A coarse graining tried by the search and the real class's probability under it."""

    cells: tuple[tuple[int, tuple[int, ...]], ...]   # (time, cell) per constrained time
    p_real: float

    @property
    def key(self):
        return (self.p_real, self.cells)


@dataclass(frozen=True)
class AdversarialResult:
    best: Candidate
    p_real: float
    zero_witness: bool
    report: TypicalityReport | None
    n_candidates: int
    candidates: tuple[Candidate, ...] = field(repr=False, default=())

    def as_dict(self) -> dict:
        return {
            "partition": [{"time": k, "cell": list(c)} for k, c in self.best.cells],
            "p_real": self.p_real,
            "zero_witness": self.zero_witness,
            "n_candidates": self.n_candidates,
            "typicality": self.report.as_dict() if self.report else None,
        }


def _greedy_cells(real_site: int, dim: int, score) -> list[tuple[int, ...]]:
    """Singleton around ``real_site``, then repeatedly add the site scoring lowest."""
    cell = (real_site,)
    score(cell)
    out = [cell]
    while len(cell) < dim - 1:
        rest = [s for s in range(dim) if s not in cell]
        best = min(rest, key=lambda s: (score(tuple(sorted(cell + (s,)))), s))
        cell = tuple(sorted(cell + (best,)))
        out.append(cell)
    return out


def _cells_containing(site: int, dim: int):
    """Every proper subset of ``range(dim)`` containing ``site``; the whole set if ``dim == 1``."""
    others = [s for s in range(dim) if s != site]
    if not others:
        yield (site,)
        return
    for r in range(len(others)):
        for extra in itertools.combinations(others, r):
            yield tuple(sorted((site,) + extra))


def adversarial_coarse_graining(real_path: FinePath, grid: TimeGrid, psi0, U,
                                budget: int = 1000, theta: float = 1.0,
                                multi_time: bool = False, max_paths: int | None = None,
                                table: PathTable | None = None) -> AdversarialResult:
    """Search two-cell partitions at single grid times for the least likely real class.

    When every such partition fits in ``budget`` they are all tried;
    otherwise the real site's cell is grown greedily. Probabilities are fine-grained sums of path weights over each class. With
    ``multi_time`` the search also tries pairs of times, where the real class
    is the intersection of the two cells and its extended probability can be
    negative. At most ``budget`` candidates are evaluated; ties go to the
    lexicographically smallest partition.
    """
    real_path.validate(grid)
    if table is None:
        table = weight_table(psi0, U, grid, max_paths=max_paths)
    elif table.grid != grid:
        raise BasisMismatchError("path table was built on a different grid")
    d, n = grid.basis.dim, grid.n_steps
    cols = {k: table.site_column(k) for k in range(1, n + 1)}
    seen: dict[tuple, Candidate] = {}

    def evaluate(cells) -> float:
        if cells in seen:
            return seen[cells].p_real
        if len(seen) >= budget:
            return math.inf
        mask = np.ones(table.weights.shape[0], dtype=bool)
        for k, cell in cells:
            mask &= np.isin(cols[k], cell)
        p = kernels.neumaier_sum(table.weights[mask])
        seen[cells] = Candidate(cells, p)
        return p

    exhaustive = n * (2 ** (d - 1) - 1) <= budget
    for k in range(1, n + 1):
        if exhaustive:
            for cell in _cells_containing(real_path[k], d):
                evaluate(((k, cell),))
        else:
            _greedy_cells(real_path[k], d, lambda c, k=k: evaluate(((k, c),)))
    if multi_time:
        for j in range(1, n + 1):
            for k in range(j + 1, n + 1):
                first = (real_path[j],)
                evaluate(((j, first), (k, (real_path[k],))))
                _greedy_cells(real_path[k], d,
                              lambda c, j=j, k=k: evaluate(((j, first), (k, c))))
    if not seen:
        raise ValueError("search budget must allow at least one candidate")
    cands = sorted(seen.values(), key=lambda c: c.key)
    best = cands[0]
    report = None
    if len(best.cells) == 1:
        report = typicality_report([best.p_real, 1.0 - best.p_real], 0, theta)
    return AdversarialResult(best, best.p_real, best.p_real <= ZERO_WITNESS, report,
                             len(cands), tuple(cands))


def classical_counterpart_search(real_z0: int, dynamics: Sequence[int], rho0: Sequence[float],
                                 budget: int = 1000, theta: float = 1.0) -> AdversarialResult:
    """Partition initial points into ``{cell around real_z0, rest}`` minimizing ``rho0(cell)``."""
    rho0 = np.asarray(rho0, dtype=float)
    perm = np.asarray(dynamics, dtype=int)
    if perm.shape != rho0.shape or sorted(perm.tolist()) != list(range(rho0.size)):
        raise ValueError("dynamics must be a permutation of the phase-space indices")
    if not 0 <= real_z0 < rho0.size:
        raise ValueError(f"real initial point {real_z0} outside phase space")
    seen: dict[tuple, Candidate] = {}

    def evaluate(cell) -> float:
        key = ((0, cell),)
        if key not in seen:
            if len(seen) >= budget:
                return math.inf
            seen[key] = Candidate(key, float(math.fsum(rho0[list(cell)])))
        return seen[key].p_real

    if rho0.size == 1:
        evaluate((0,))
    else:
        _greedy_cells(real_z0, rho0.size, evaluate)
    cands = sorted(seen.values(), key=lambda c: c.key)
    best = cands[0]
    probs = [best.p_real, 1.0 - best.p_real] if best.p_real < 1.0 else [1.0]
    report = typicality_report(probs, 0, theta)
    return AdversarialResult(best, best.p_real, best.p_real <= ZERO_WITNESS, report,
                             len(cands), tuple(cands))
