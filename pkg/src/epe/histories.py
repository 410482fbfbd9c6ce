"""Coarse-grained histories, class operators and extended probabilities.

A chain selects interior grid times ``1 <= k_1 < ... < k_m <= n`` and a
projector family at each. A history label ``alpha = (a_1, ..., a_m)`` picks
one cell per time; its class is every fine-grained path passing through
those cells. Class operators are built two independent ways:

* by summing path amplitudes over the class (``class_operator_pathsum``),
* as a chain of projections interleaved with evolution
  (``class_operator_chain``).

Heisenberg-picture operators are referred to ``t0``: ``C = W^dagger C_hat``
with ``W`` the full evolution, and they pair with the initial state, so
``p(alpha) = Re <psi0|C_alpha|psi0>`` reproduces the fine-grained sum of
path weights over the class.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import (BasisMismatchError, InvalidFamilyError, NonExhaustiveGroupingError,
                     PictureError)
from .hilbert import ProjectorFamily, StateVector, basis_of, step_matrices, total_evolution
from .paths import PathTable, check_cap

HistoryClass = tuple  # label (a_1, ..., a_m); coarse-grained sets may use any hashable

SCHRODINGER = "schrodinger"
HEISENBERG = "heisenberg"


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """Projector families at increasing grid times.

    ``branches`` optionally overrides the family at step ``len(prefix)`` for
    histories beginning with ``prefix``; by default every history sees
    ``families[j]`` at step ``j``.
    """

    times: tuple[int, ...]
    families: tuple[ProjectorFamily, ...]
    branches: Mapping[tuple[int, ...], ProjectorFamily] = field(default_factory=dict)

    def __post_init__(self):
        times = tuple(int(k) for k in self.times)
        fams = tuple(self.families)
        if not times:
            raise InvalidFamilyError("a chain needs at least one time")
        if len(times) != len(fams):
            raise InvalidFamilyError(f"{len(times)} times but {len(fams)} families")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidFamilyError(f"chain times must be strictly increasing, got {times}")
        dims = {f.basis.dim for f in fams} | {f.basis.dim for f in self.branches.values()}
        if len(dims) != 1:
            raise BasisMismatchError(f"families live on different bases: dims {sorted(dims)}")
        for prefix in self.branches:
            if not 1 <= len(prefix) < len(times):
                raise InvalidFamilyError(f"branch prefix {prefix} does not select a later step")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "families", fams)
        object.__setattr__(self, "branches", dict(self.branches))

    @classmethod
    def from_steps(cls, steps: Iterable[tuple[int, ProjectorFamily]],
                   branches: Mapping | None = None) -> "ChainSpec":
        steps = list(steps)
        return cls(tuple(k for k, _ in steps), tuple(f for _, f in steps), branches or {})

    @property
    def dim(self) -> int:
        return self.families[0].basis.dim

    @property
    def branch_independent(self) -> bool:
        return not self.branches

    def family(self, prefix: Sequence[int]) -> ProjectorFamily:
        prefix = tuple(prefix)
        return self.branches.get(prefix, self.families[len(prefix)])

    def validate(self, n_steps: int) -> None:
        if self.times[0] < 1 or self.times[-1] > n_steps:
            raise InvalidFamilyError(
                f"chain times {self.times} must lie in 1..{n_steps} (interior grid times)"
            )

    def labels(self) -> list[HistoryClass]:
        """All labels, lexicographically ordered."""
        out: list[HistoryClass] = []

        def walk(prefix):
            if len(prefix) == len(self.times):
                out.append(prefix)
                return
            for a in range(len(self.family(prefix))):
                walk(prefix + (a,))

        walk(())
        return out

    def check_label(self, label: Sequence[int]) -> HistoryClass:
        label = tuple(int(a) for a in label)
        if len(label) != len(self.times):
            raise InvalidFamilyError(f"label {label} needs {len(self.times)} entries")
        for j, a in enumerate(label):
            if not 0 <= a < len(self.family(label[:j])):
                raise InvalidFamilyError(f"label {label}: cell {a} does not exist at step {j}")
        return label

    def tree(self):
        """Flatten the chain into node tables for the path-sum kernels."""
        labels = self.labels()
        class_index = {lab: i for i, lab in enumerate(labels)}
        m = len(self.times)
        prefixes = [()]
        node_index = {(): 0}
        i = 0
        while i < len(prefixes):
            p = prefixes[i]
            if len(p) < m - 1:
                for a in range(len(self.family(p))):
                    node_index[p + (a,)] = len(prefixes)
                    prefixes.append(p + (a,))
            i += 1
        width = max(len(self.family(p)) for p in prefixes)
        node_cell = np.array([self.family(p).cell_of for p in prefixes], dtype=np.intp)
        node_child = np.full((len(prefixes), width), -1, dtype=np.intp)
        node_last = np.zeros(len(prefixes), dtype=np.intp)
        for p, node in node_index.items():
            last = len(p) == m - 1
            node_last[node] = int(last)
            for a in range(len(self.family(p))):
                node_child[node, a] = class_index[p + (a,)] if last else node_index[p + (a,)]
        return labels, node_cell, node_child, node_last


@dataclass(frozen=True, eq=False)
class ClassOperator:
    picture: str
    matrix: np.ndarray

    def __post_init__(self):
        if self.picture not in (SCHRODINGER, HEISENBERG):
            raise PictureError(f"unknown picture {self.picture!r}")


def class_operators_pathsum(chain: ChainSpec, U, n_steps: int, max_paths: int | None = None,
                            workers: int = 1, backend: str | None = None
                            ) -> dict[HistoryClass, ClassOperator]:
    """Every Schrodinger class operator of ``chain`` by brute-force path summation."""
    chain.validate(n_steps)
    d = chain.dim
    if basis_of(U).dim != d:
        raise BasisMismatchError("chain and dynamics live on different bases")
    check_cap(d ** (n_steps + 1), max_paths)
    kern = kernels.get_backend(backend)
    steps = np.ascontiguousarray(step_matrices(U, n_steps))
    us_re, us_im = np.ascontiguousarray(steps.real), np.ascontiguousarray(steps.imag)
    labels, node_cell, node_child, node_last = chain.tree()
    time_step = np.zeros(n_steps + 1, dtype=np.intp)
    time_step[list(chain.times)] = 1

    def column(q0):
        return kern.class_block(us_re, us_im, q0, time_step, node_cell, node_child,
                                node_last, len(labels))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(column, range(d)))
    else:
        cols = [column(q0) for q0 in range(d)]
    mats = np.empty((len(labels), d, d), dtype=complex)
    for q0, (re, im) in enumerate(cols):
        mats[:, :, q0].real = re
        mats[:, :, q0].imag = im
    return {lab: ClassOperator(SCHRODINGER, mats[i]) for i, lab in enumerate(labels)}


def class_operator_pathsum(cls: Sequence[int], chain: ChainSpec, U, n_steps: int,
                           max_paths: int | None = None) -> ClassOperator:
    label = chain.check_label(cls)
    return class_operators_pathsum(chain, U, n_steps, max_paths=max_paths)[label]


def class_operator_chain(cls: Sequence[int], chain: ChainSpec, U, n_steps: int) -> ClassOperator:
    """Schrodinger class operator ``U..U P_{a_m} U..U ... P_{a_1} U..U``."""
    chain.validate(n_steps)
    label = chain.check_label(cls)
    steps = step_matrices(U, n_steps)
    if steps.shape[-1] != chain.dim:
        raise BasisMismatchError("chain and dynamics live on different bases")
    out = np.eye(chain.dim, dtype=complex)
    t = 0
    for j, (k, a) in enumerate(zip(chain.times, label)):
        for s in range(t, k):
            out = steps[s] @ out
        out = chain.family(label[:j]).apply(a, out)
        t = k
    for s in range(t, n_steps):
        out = steps[s] @ out
    return ClassOperator(SCHRODINGER, out)


def to_heisenberg(op: ClassOperator, U, n_total: int) -> ClassOperator:
    """Left-multiply by ``exp(+i H (t_f - t0))``, the inverse full evolution."""
    if op.picture != SCHRODINGER:
        raise PictureError("operator is already in the Heisenberg picture")
    W = total_evolution(step_matrices(U, n_total))
    return ClassOperator(HEISENBERG, W.conj().T @ op.matrix)


def extended_probability(op: ClassOperator, psi_H: StateVector) -> float:
    """``Re <Psi|C|Psi>``; may fall outside ``[0, 1]``."""
    if op.picture != HEISENBERG:
        raise PictureError("extended_probability needs a Heisenberg-picture operator")
    if op.matrix.shape[0] != psi_H.basis.dim:
        raise BasisMismatchError("operator and state dimensions differ")
    v = psi_H.amplitudes
    return float(np.vdot(v, op.matrix @ v).real)


def heisenberg_projector(family: ProjectorFamily, alpha: int, steps: np.ndarray,
                         k: int) -> np.ndarray:
    """``P(t_k) = W_k^dagger P W_k`` with ``W_k`` the evolution up to time ``k``."""
    W = total_evolution(steps, k)
    return W.conj().T @ family.apply(alpha, W)


@dataclass(frozen=True, eq=False)
class HistorySet:
    """Exhaustive exclusive classes with their Heisenberg class operators.

    ``operators[i]`` belongs to ``labels[i]``. Sets made by
    :func:`coarse_grain` have ``chain = None`` and record in ``members``
    which finer labels each coarse label collects.
    """

    labels: tuple
    operators: np.ndarray
    steps: np.ndarray
    chain: ChainSpec | None = None
    members: Mapping[Hashable, tuple] | None = None

    @property
    def dim(self) -> int:
        return self.operators.shape[-1]

    @property
    def n_steps(self) -> int:
        return self.steps.shape[0]

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"label {label!r} not in history set") from None

    def operator(self, label) -> ClassOperator:
        return ClassOperator(HEISENBERG, self.operators[self.index(label)])

    def probabilities(self, psi_H: StateVector) -> np.ndarray:
        v = psi_H.amplitudes
        return np.array([np.vdot(v, C @ v).real for C in self.operators])

    def completeness_defect(self) -> float:
        return float(np.max(np.abs(self.operators.sum(axis=0) - np.eye(self.dim))))


def build_history_set(chain: ChainSpec, U, n_steps: int, method: str = "chain",
                      max_paths: int | None = None, workers: int = 1) -> HistorySet:
    chain.validate(n_steps)
    steps = np.ascontiguousarray(step_matrices(U, n_steps))
    labels = chain.labels()
    if method == "chain":
        ops = [class_operator_chain(lab, chain, U, n_steps) for lab in labels]
    elif method == "pathsum":
        table = class_operators_pathsum(chain, U, n_steps, max_paths=max_paths, workers=workers)
        ops = [table[lab] for lab in labels]
    else:
        raise ValueError(f"unknown method {method!r}; use 'chain' or 'pathsum'")
    W_dag = total_evolution(steps).conj().T
    mats = np.stack([W_dag @ op.matrix for op in ops])
    return HistorySet(tuple(labels), mats, steps, chain=chain)


def _ordered(keys):
    unique = list(dict.fromkeys(keys))
    try:
        return sorted(unique)
    except TypeError:
        return unique


def coarse_grain(hset: HistorySet, grouping: Mapping | Callable) -> HistorySet:
    """Merge classes: ``C_bar = sum of C over the classes mapped to it``."""
    if callable(grouping) and not isinstance(grouping, Mapping):
        target = {lab: grouping(lab) for lab in hset.labels}
    else:
        missing = [lab for lab in hset.labels if lab not in grouping]
        if missing:
            raise NonExhaustiveGroupingError(f"grouping leaves labels unassigned: {missing}")
        target = {lab: grouping[lab] for lab in hset.labels}
    coarse = _ordered(target.values())
    members = {c: tuple(lab for lab in hset.labels if target[lab] == c) for c in coarse}
    mats = np.stack([
        sum((hset.operators[hset.index(lab)] for lab in members[c][1:]),
            start=hset.operators[hset.index(members[c][0])].copy())
        for c in coarse
    ])
    return HistorySet(tuple(coarse), mats, hset.steps, chain=None, members=members)


def path_class_indices(table: PathTable, chain: ChainSpec) -> np.ndarray:
    """Index into ``chain.labels()`` of the class of every path in ``table``."""
    chain.validate(table.grid.n_steps)
    _, node_cell, node_child, node_last = chain.tree()
    node = np.zeros(table.weights.shape[0], dtype=np.intp)
    for k in chain.times:
        cell = node_cell[node, table.site_column(k)]
        node = node_child[node, cell]
    return node


def probabilities_from_paths(table: PathTable, chain: ChainSpec) -> np.ndarray:
    """Extended probabilities as compensated sums of fine-grained weights."""
    idx = path_class_indices(table, chain)
    n = len(chain.labels())
    order = np.argsort(idx, kind="stable")
    bounds = np.searchsorted(idx[order], np.arange(n + 1))
    w = table.weights[order]
    return np.array([kernels.neumaier_sum(w[bounds[c]:bounds[c + 1]]) for c in range(n)])
