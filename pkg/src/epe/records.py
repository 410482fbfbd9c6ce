"""Strong records, pointer models and conditional states.

A set of histories is recorded when orthogonal projectors ``R_alpha`` at a
time after the chain satisfy ``R_alpha |Psi> ~ C_alpha |Psi>``. Two record
searches are provided: the unrestricted one built from the branch vectors
themselves, and a basis-diagonal one that may only use cells of a given
projector family at the final time.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decoherence import (DEFAULT_EPS, BranchSet, branch_vectors, certify_medium_decoherence,
                          decoherence_matrix)
from .errors import (BasisMismatchError, ImpossiblePastError, InvalidFamilyError,
                     NotRecordedError, UnconditionedPastError)
from .histories import ChainSpec, HistorySet, build_history_set, heisenberg_projector
from .hilbert import (ConfigBasis, ProjectorFamily, Propagator, StateVector, step_matrices,
                      tensor)

DEFAULT_TOL = 1e-6
ZERO_BRANCH = 1e-12
ZERO_PAST = 1e-12


class NonDecoherentWarning(UserWarning):
    """Conditional probabilities requested on a set that is not medium-decoherent."""


@dataclass(frozen=True, eq=False)
class RecordSet:
    labels: tuple
    projectors: np.ndarray
    residual: np.ndarray
    fidelity: np.ndarray
    diagonal: bool = False

    def orthogonality_defect(self) -> float:
        P = self.projectors
        worst = 0.0
        for a in range(len(P)):
            for b in range(len(P)):
                target = P[a] if a == b else 0.0
                worst = max(worst, float(np.max(np.abs(P[a] @ P[b] - target))))
        return worst

    def completeness_defect(self) -> float:
        total = self.projectors.sum(axis=0) + self.residual
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))


def _fidelities(projectors: np.ndarray, branches: BranchSet) -> np.ndarray:
    psi = branches.psi.amplitudes
    return np.array([np.linalg.norm(R @ psi - branches.vectors[:, a])
                     for a, R in enumerate(projectors)])


def construct_records(branches: BranchSet, rank_tol: float = 1e-10) -> RecordSet:
    """Record projectors onto the symmetrically orthonormalized branch directions.

    Branches below ``ZERO_BRANCH`` in norm get a zero projector. When the
    nonzero branches are linearly dependent, the largest ones (ties broken by
    label order) that keep the family independent are orthonormalized and the
    rest also get zero projectors.
    """
    v = branches.vectors
    d, n = v.shape
    norms = branches.norms
    order = sorted(range(n), key=lambda a: (-norms[a], a))
    chosen: list[int] = []
    basis: list[np.ndarray] = []
    for a in order:
        if norms[a] <= ZERO_BRANCH:
            continue
        r = v[:, a].copy()
        for e in basis:
            r -= np.vdot(e, r) * e
        if np.linalg.norm(r) > rank_tol * norms[a]:
            chosen.append(a)
            basis.append(r / np.linalg.norm(r))
    chosen.sort()
    projectors = np.zeros((n, d, d), dtype=complex)
    if chosen:
        B = v[:, chosen]
        evals, evecs = np.linalg.eigh(B.conj().T @ B)
        O = B @ (evecs * evals ** -0.5) @ evecs.conj().T
        for col, a in enumerate(chosen):
            o = O[:, col]
            projectors[a] = np.outer(o, o.conj())
    residual = np.eye(d, dtype=complex) - projectors.sum(axis=0)
    return RecordSet(branches.labels, projectors, residual, _fidelities(projectors, branches))


def diagonal_records(branches: BranchSet, family: ProjectorFamily, steps: np.ndarray,
                     time: int | None = None) -> RecordSet:
    """Records restricted to unions of ``family`` cells at grid time ``time``.

    Each cell goes to the branch carrying most of its weight there. Cells are
    Heisenberg projectors at ``time`` (default: the final time).
    """
    time = steps.shape[0] if time is None else time
    if family.basis.dim != branches.vectors.shape[0]:
        raise BasisMismatchError("record family and branches live on different bases")
    d, n = branches.vectors.shape
    projectors = np.zeros((n, d, d), dtype=complex)
    for c in range(len(family)):
        Pc = heisenberg_projector(family, c, steps, time)
        weights = [np.linalg.norm(Pc @ branches.vectors[:, a]) ** 2 for a in range(n)]
        projectors[int(np.argmax(weights))] += Pc
    residual = np.eye(d, dtype=complex) - projectors.sum(axis=0)
    return RecordSet(branches.labels, projectors, residual,
                     _fidelities(projectors, branches), diagonal=True)


@dataclass(frozen=True)
class RecordVerification:
    verified: bool
    tol: float
    fidelity: tuple[float, ...]
    max_fidelity: float
    max_branch_norm: float
    max_offdiag: float
    decoherence_bound: float
    decoherence_ok: bool
    min_p_epe: float
    positivity_bound: float
    positivity_ok: bool
    diagonal: bool

    def __bool__(self) -> bool:
        return self.verified

    def as_dict(self) -> dict:
        return {
            "verified": self.verified, "tol": self.tol, "diagonal": self.diagonal,
            "fidelity": list(self.fidelity), "max_fidelity": self.max_fidelity,
            "max_branch_norm": self.max_branch_norm,
            "decoherence": {"max_offdiag": self.max_offdiag, "bound": self.decoherence_bound,
                            "holds": self.decoherence_ok},
            "positivity": {"min_p_epe": self.min_p_epe, "bound": -self.positivity_bound,
                           "holds": self.positivity_ok},
        }


def verify_records(R: RecordSet, hset: HistorySet, psi_H: StateVector,
                   tol: float = DEFAULT_TOL) -> RecordVerification:
    """Check ``max_a ||R_a Psi - C_a Psi|| <= tol`` and its two corollaries.

    Verified records force ``max |D(a,b)| <= 2 tol m + tol^2`` and
    ``min p_EPE >= -(2 tol m + tol^2)`` with ``m`` the largest branch norm;
    both are evaluated and reported.
    """
    if R.projectors.shape[-1] != hset.dim or psi_H.basis.dim != hset.dim:
        raise BasisMismatchError("record projectors, history set and state dimensions differ")
    if len(R.labels) != len(hset.labels):
        raise BasisMismatchError("record set and history set have different classes")
    branches = branch_vectors(hset, psi_H)
    fid = _fidelities(R.projectors, branches)
    max_fid = float(fid.max())
    m = float(branches.norms.max())
    bound = 2 * tol * m + tol ** 2
    D = decoherence_matrix(branches)
    min_p = float(hset.probabilities(psi_H).min())
    verified = max_fid <= tol
    return RecordVerification(
        verified=verified, tol=tol, fidelity=tuple(float(f) for f in fid),
        max_fidelity=max_fid, max_branch_norm=m,
        max_offdiag=D.max_offdiag, decoherence_bound=bound,
        decoherence_ok=D.max_offdiag <= bound,
        min_p_epe=min_p, positivity_bound=bound, positivity_ok=min_p >= -bound,
        diagonal=R.diagonal,
    )


def record_history_correlation(R: RecordSet, hset: HistorySet, psi_H: StateVector) -> np.ndarray:
    """``p(b, a) = Re <Psi|C_a^dag R_b C_a|Psi>``; the last row is the residual projector."""
    branches = branch_vectors(hset, psi_H)
    rows = list(R.projectors) + [R.residual]
    out = np.empty((len(rows), len(hset.labels)))
    for b, Rb in enumerate(rows):
        for a in range(len(hset.labels)):
            va = branches.vectors[:, a]
            out[b, a] = np.vdot(va, Rb @ va).real
    return out


@dataclass(frozen=True, eq=False)
class PointerModel:
    """A pointer with one ready cell (index 0) and one cell per recorded alternative.

    The coupling flips the pointer between ready and cell ``j + 1`` when the
    system is in trigger cell ``j``, and does nothing elsewhere.
    """

    system_basis: ConfigBasis
    trigger_cells: tuple[tuple[int, ...], ...]
    coupling: np.ndarray

    @classmethod
    def build(cls, system_basis: ConfigBasis, trigger_cells: Sequence[Sequence[int]],
              enabled: bool = True) -> "PointerModel":
        cells = tuple(tuple(sorted(int(i) for i in c)) for c in trigger_cells)
        flat = [i for c in cells for i in c]
        if len(flat) != len(set(flat)) or any(not 0 <= i < system_basis.dim for i in flat):
            raise InvalidFamilyError("trigger cells must be disjoint subsets of the system basis")
        ds, m = system_basis.dim, len(cells) + 1
        K = np.eye(ds * m, dtype=complex)
        if enabled:
            for j, cell in enumerate(cells):
                for q in cell:
                    a, b = q * m, q * m + j + 1
                    K[[a, b], [a, b]] = 0.0
                    K[a, b] = K[b, a] = 1.0
        return cls(system_basis, cells, K)

    @classmethod
    def from_family(cls, family: ProjectorFamily, recorded: Sequence[int] | None = None,
                    enabled: bool = True) -> "PointerModel":
        idx = range(len(family)) if recorded is None else recorded
        try:
            cells = [family.cells[j] for j in idx]
        except IndexError:
            raise InvalidFamilyError(f"recorded cells {list(idx)} not in trigger family") from None
        return cls.build(family.basis, cells, enabled)

    @property
    def pointer_basis(self) -> ConfigBasis:
        m = len(self.trigger_cells) + 1
        return ConfigBasis(m, ("ready",) + tuple(f"rec{j}" for j in range(m - 1)))

    @property
    def product_basis(self) -> ConfigBasis:
        return ConfigBasis(self.system_basis.dim * self.pointer_basis.dim)


@dataclass(frozen=True, eq=False)
class PointerSetup:
    psi: StateVector
    steps: tuple[Propagator, ...]
    chain: ChainSpec
    hset: HistorySet
    record_family: ProjectorFamily
    model: PointerModel

    @property
    def n_steps(self) -> int:
        return len(self.steps)


def lift_family(family: ProjectorFamily, pointer: ConfigBasis) -> ProjectorFamily:
    return tensor(family, ProjectorFamily.whole(pointer))


def lift_chain(chain: ChainSpec, pointer: ConfigBasis) -> ChainSpec:
    return ChainSpec(chain.times, tuple(lift_family(f, pointer) for f in chain.families),
                     {p: lift_family(f, pointer) for p, f in chain.branches.items()})


def attach_pointer(model: PointerModel, psi_sys: StateVector, U_sys, n_steps: int,
                   trigger_step: int, chain: ChainSpec) -> PointerSetup:
    """Couple a pointer that records the trigger cells just after ``trigger_step``.

    Step ``k`` of the enlarged dynamics is ``U_sys (x) 1``, with the coupling
    applied first at ``k = trigger_step``. A trigger at ``n_steps`` (after
    the final time) appends one pure-coupling step to the grid. The record
    family pairs the last chain family (when it sits at the final time) with
    the fine pointer cells.
    """
    if psi_sys.basis.dim != model.system_basis.dim or chain.dim != model.system_basis.dim:
        raise InvalidFamilyError("pointer model, state and chain must share the system basis")
    if not 0 <= trigger_step <= n_steps:
        raise InvalidFamilyError(f"trigger step {trigger_step} outside 0..{n_steps}")
    pb = model.pointer_basis
    basis = model.product_basis
    ready = StateVector.basis_state(pb, 0)
    psi = tensor(psi_sys, ready)
    psi = StateVector(basis, psi.amplitudes)
    sys_steps = step_matrices(U_sys, n_steps)
    eye_m = np.eye(pb.dim)
    steps = []
    for k in range(n_steps):
        mat = np.kron(sys_steps[k], eye_m)
        if k == trigger_step:
            mat = mat @ model.coupling
        steps.append(Propagator.from_unitary(mat, basis))
    total = n_steps
    if trigger_step == n_steps:
        steps.append(Propagator.from_unitary(model.coupling, basis))
        total += 1
    big_chain = lift_chain(chain, pb)
    big_chain = ChainSpec(big_chain.times, tuple(ProjectorFamily(basis, f.cells)
                                                 for f in big_chain.families),
                          {p: ProjectorFamily(basis, f.cells)
                           for p, f in big_chain.branches.items()})
    hset = build_history_set(big_chain, steps, total)
    if chain.times[-1] == n_steps and chain.branch_independent:
        sys_family = chain.families[-1]
    else:
        sys_family = ProjectorFamily.whole(model.system_basis)
    rec = tensor(sys_family, ProjectorFamily.fine(pb))
    rec = ProjectorFamily(basis, rec.cells)
    return PointerSetup(psi, tuple(steps), big_chain, hset, rec, model)


def _prefix_vector(hset: HistorySet, past: Sequence[int], psi_H: StateVector) -> np.ndarray:
    chain = hset.chain
    if chain is None:
        raise InvalidFamilyError("conditional states need a chain-built history set")
    past = tuple(int(a) for a in past)
    if len(past) > len(chain.times):
        raise InvalidFamilyError(f"prefix {past} longer than the chain")
    v = psi_H.amplitudes.copy()
    for j, a in enumerate(past):
        fam = chain.family(past[:j])
        if not 0 <= a < len(fam):
            raise InvalidFamilyError(f"prefix {past}: no cell {a} at step {j}")
        v = heisenberg_projector(fam, a, hset.steps, chain.times[j]) @ v
    return v


def conditional_state(past: Sequence[int], hset: HistorySet, psi_H: StateVector) -> StateVector:
    """Normalized ``P^k(t_k) ... P^1(t_1) |Psi>`` for the prefix ``past``."""
    v = _prefix_vector(hset, past, psi_H)
    nrm = float(np.linalg.norm(v))
    if nrm <= ZERO_PAST:
        raise ImpossiblePastError(f"prefix {tuple(past)} has zero branch norm ({nrm:.3e})")
    return StateVector(psi_H.basis, v / nrm)


def _suffixes(hset: HistorySet, past: tuple, futures):
    k = len(past)
    if futures is None:
        return [lab[k:] for lab in hset.labels if lab[:k] == past]
    return [tuple(int(a) for a in s) for s in futures]


def conditional_probability(futures: Sequence[Sequence[int]] | None, past: Sequence[int],
                            hset: HistorySet, psi_H: StateVector,
                            eps: float = DEFAULT_EPS) -> float:
    """``sum_f p(f, past) / p(past)`` over the future suffixes ``futures``.

    ``futures=None`` means every continuation. Extended probabilities are used
    whether or not the set decoheres; a :class:`NonDecoherentWarning` is
    issued when it does not.
    """
    past = tuple(int(a) for a in past)
    probs = hset.probabilities(psi_H)
    denom = sum(p for lab, p in zip(hset.labels, probs) if lab[:len(past)] == past)
    if abs(denom) <= ZERO_PAST:
        raise UnconditionedPastError(f"prefix {past} has extended probability {denom:.3e}")
    cert = certify_medium_decoherence(decoherence_matrix(branch_vectors(hset, psi_H)), eps)
    if not cert.decoherent:
        warnings.warn(f"history set is not medium-decoherent (max |D| = {cert.max_offdiag:.3e})",
                      NonDecoherentWarning, stacklevel=2)
    num = sum(probs[hset.index(past + s)] for s in _suffixes(hset, past, futures))
    return float(num / denom)


def conditional_probability_from_state(futures: Sequence[Sequence[int]] | None,
                                       past: Sequence[int], hset: HistorySet,
                                       psi_H: StateVector, tol: float = DEFAULT_TOL) -> float:
    """``sum_f ||P^n ... P^{k+1} |Psi_past>||^2`` using the conditional state.

    Offered only for sets whose trivial records verify at ``tol``.
    """
    past = tuple(int(a) for a in past)
    branches = branch_vectors(hset, psi_H)
    check = verify_records(construct_records(branches), hset, psi_H, tol)
    if not check.verified:
        raise NotRecordedError(
            f"history set is not recorded at tol={tol} (max fidelity {check.max_fidelity:.3e})"
        )
    state = conditional_state(past, hset, psi_H).amplitudes
    chain = hset.chain
    total = 0.0
    for s in _suffixes(hset, past, futures):
        label = past + s
        v = state
        for j in range(len(past), len(label)):
            fam = chain.family(label[:j])
            v = heisenberg_projector(fam, label[j], hset.steps, chain.times[j]) @ v
        total += float(np.vdot(v, v).real)
    return total

