"""Decoherence functional, medium-decoherence certification and EPE/DH comparison."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BasisMismatchError
from .histories import HistorySet
from .hilbert import StateVector

DEFAULT_EPS = 1e-8
POSITIVITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BranchSet:
    """Branch vectors ``C_alpha |Psi>`` as columns, in label order."""

    labels: tuple
    vectors: np.ndarray
    psi: StateVector

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(dh_probabilities(self))

    def completeness_defect(self) -> float:
        return float(np.max(np.abs(self.vectors.sum(axis=1) - self.psi.amplitudes)))


def branch_vectors(hset: HistorySet, psi_H: StateVector) -> BranchSet:
    if psi_H.basis.dim != hset.dim:
        raise BasisMismatchError("state and history set dimensions differ")
    cols = np.einsum("aij,j->ia", hset.operators, psi_H.amplitudes)
    return BranchSet(hset.labels, cols, psi_H)


def dh_probabilities(branches: BranchSet) -> np.ndarray:
    """Squared branch norms ``||C_alpha Psi||^2``."""
    v = branches.vectors
    return np.einsum("ia,ia->a", v.conj(), v).real


@dataclass(frozen=True, eq=False)
class DecoherenceMatrix:
    labels: tuple
    entries: np.ndarray
    epsilon: float = DEFAULT_EPS

    def off_diagonal(self) -> np.ndarray:
        off = np.abs(self.entries).copy()
        np.fill_diagonal(off, 0.0)
        return off

    @property
    def max_offdiag(self) -> float:
        return float(self.off_diagonal().max()) if len(self.labels) > 1 else 0.0


def write_decoherence_rows(writer, D: DecoherenceMatrix, chain_name: str = "") -> None:
    """Append ``chain, label_a, label_b, re, im`` rows to a ``csv.writer``."""
    for i, a in enumerate(D.labels):
        for j, b in enumerate(D.labels):
            z = D.entries[i, j]
            writer.writerow([chain_name, _fmt_label(a), _fmt_label(b),
                             f"{z.real:.12g}", f"{z.imag:.12g}"])


def _fmt_label(label) -> str:
    if isinstance(label, tuple):
        return "-".join(str(x) for x in label)
    return str(label)


def decoherence_matrix(branches: BranchSet, eps: float = DEFAULT_EPS) -> DecoherenceMatrix:
    """Gram matrix ``D(a, b) = <Psi_a|Psi_b>`` of the branch vectors."""
    v = branches.vectors
    D = v.conj().T @ v
    D = 0.5 * (D + D.conj().T)
    # diagonal taken from the same reduction as dh_probabilities
    D[np.diag_indices_from(D)] = dh_probabilities(branches)
    return DecoherenceMatrix(branches.labels, D, eps)


@dataclass(frozen=True)
class Certification:
    decoherent: bool
    max_offdiag: float
    bound: float
    eps: float
    weakly_decoherent: bool

    def as_dict(self) -> dict:
        return {"decoherent": self.decoherent, "max_offdiag": self.max_offdiag,
                "bound": self.bound, "eps": self.eps,
                "weakly_decoherent": self.weakly_decoherent}


def certify_medium_decoherence(D: DecoherenceMatrix, eps: float | None = None) -> Certification:
    """Medium decoherence: ``max |D(a,b)|, a != b`` at most ``eps * max D(a,a)``.

    ``bound`` is ``max_a sum_{b != a} |D(b, a)|``, which caps
    ``|p_EPE - p_DH|`` for every class. The weak (real-part-only) flag is
    informational.
    """
    eps = D.epsilon if eps is None else eps
    if eps <= 0:
        raise ValueError("eps must be positive")
    off = D.off_diagonal()
    scale = float(np.max(D.entries.diagonal().real))
    max_off = float(off.max()) if off.size > 1 else 0.0
    re_off = np.abs(D.entries.real)
    np.fill_diagonal(re_off, 0.0)
    return Certification(
        decoherent=max_off <= eps * scale,
        max_offdiag=max_off,
        bound=float(off.sum(axis=0).max()),
        eps=eps,
        weakly_decoherent=float(re_off.max()) <= eps * scale,
    )


@dataclass(frozen=True)
class ClassComparison:
    label: object
    p_epe: float
    p_dh: float
    bound: float

    @property
    def difference(self) -> float:
        return abs(self.p_epe - self.p_dh)

    @property
    def within_bound(self) -> bool:
        # slack for rounding when the bound is exactly zero
        return self.difference <= self.bound + 1e-12


def compare_epe_dh(hset: HistorySet, psi_H: StateVector) -> list[ClassComparison]:
    """Per class ``Re<Psi|C|Psi>`` against ``||C Psi||^2`` with the interference bound.

    ``<Psi|C_a|Psi> = sum_b D(b, a)``, so the two differ by at most the
    off-diagonal column sum.
    """
    branches = branch_vectors(hset, psi_H)
    D = decoherence_matrix(branches)
    p_epe = hset.probabilities(psi_H)
    p_dh = dh_probabilities(branches)
    col = D.off_diagonal().sum(axis=0)
    return [ClassComparison(lab, float(pe), float(pd), float(b))
            for lab, pe, pd, b in zip(hset.labels, p_epe, p_dh, col)]


@dataclass(frozen=True)
class PositivityCheck:
    all_nonneg: bool
    min_p: float


def linear_positivity_check(hset: HistorySet, psi_H: StateVector) -> PositivityCheck:
    p = hset.probabilities(psi_H)
    min_p = float(p.min())
    return PositivityCheck(min_p >= -POSITIVITY_TOL, min_p)
