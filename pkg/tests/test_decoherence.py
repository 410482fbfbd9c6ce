import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epe.decoherence import (branch_vectors, certify_medium_decoherence, compare_epe_dh,
                             decoherence_matrix, dh_probabilities, linear_positivity_check,
                             write_decoherence_rows)
from epe.hilbert import (ConfigBasis, Hamiltonian, ProjectorFamily, Propagator, StateVector,
                         build_propagator)
from epe.histories import ChainSpec, build_history_set

import oracles

S8, C8 = math.sin(math.pi / 8), math.cos(math.pi / 8)


def _sets(fixq2):
    basis, U, psi0 = fixq2
    F = ProjectorFamily.fine(basis)
    one = build_history_set(ChainSpec((1,), (F,)), U, 2)
    two = build_history_set(ChainSpec((1, 2), (F, F)), U, 2)
    whole = build_history_set(ChainSpec((1,), (ProjectorFamily.whole(basis),)), U, 2)
    return one, two, whole, psi0


def test_branch_vectors(fixq2):
    one, two, whole, psi = _sets(fixq2)
    assert np.allclose(branch_vectors(whole, psi).vectors[:, 0], psi.amplitudes, atol=1e-14)
    v = branch_vectors(one, psi).vectors
    assert abs(np.vdot(v[:, 0], v[:, 1])) < 1e-15
    br = branch_vectors(two, psi)
    assert br.vectors.shape == (2, 4)
    assert br.completeness_defect() < 1e-12


def test_decoherence_matrix_values(fixq2):
    one, two, whole, psi = _sets(fixq2)
    D1 = decoherence_matrix(branch_vectors(one, psi))
    assert D1.max_offdiag < 1e-14
    D2 = decoherence_matrix(branch_vectors(two, psi))
    assert D2.max_offdiag > 0.05
    assert np.sum(D2.entries) == pytest.approx(1, abs=1e-12)
    # explicit Gram oracle
    v = branch_vectors(two, psi).vectors
    gram = np.array([[np.vdot(v[:, a], v[:, b]) for b in range(4)] for a in range(4)])
    assert np.max(np.abs(gram - D2.entries)) < 1e-14


def test_certification(fixq2):
    one, two, whole, psi = _sets(fixq2)
    assert certify_medium_decoherence(decoherence_matrix(branch_vectors(one, psi)), 1e-10).decoherent
    cert = certify_medium_decoherence(decoherence_matrix(branch_vectors(two, psi)), 1e-3)
    assert not cert.decoherent
    assert cert.max_offdiag == pytest.approx(0.125, abs=1e-12)
    assert set(cert.as_dict()) >= {"decoherent", "max_offdiag", "bound", "eps"}
    with pytest.raises(ValueError):
        certify_medium_decoherence(decoherence_matrix(branch_vectors(one, psi)), 0.0)


def test_dh_and_comparison(fixq2):
    one, two, whole, psi = _sets(fixq2)
    assert dh_probabilities(branch_vectors(whole, psi)) == pytest.approx([1.0])
    assert dh_probabilities(branch_vectors(one, psi)) == pytest.approx([C8 ** 2, S8 ** 2], abs=1e-14)
    comp = {c.label: c for c in compare_epe_dh(two, psi)}
    c10 = comp[(1, 0)]
    assert c10.p_epe == pytest.approx(-0.103553390593, abs=1e-11)
    assert c10.p_dh >= 0
    assert c10.within_bound
    for c in compare_epe_dh(one, psi):
        assert abs(c.p_epe - c.p_dh) < 1e-10


def test_linear_positivity(fixq2):
    one, two, whole, psi = _sets(fixq2)
    assert linear_positivity_check(one, psi).all_nonneg
    chk = linear_positivity_check(two, psi)
    assert not chk.all_nonneg
    assert chk.min_p == pytest.approx(-0.103553390593, abs=1e-11)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_bound_and_nonnegativity_properties(d, n, seed):
    rng = np.random.default_rng(seed)
    b = ConfigBasis(d)
    U = build_propagator(Hamiltonian(b, oracles.random_hermitian(rng, d)), 0.9)
    psi = StateVector(b, oracles.random_state(rng, d))
    times = sorted(rng.choice(np.arange(1, n + 1), size=min(n, 2), replace=False).tolist())
    fams = tuple(ProjectorFamily(b, tuple(map(tuple, oracles.random_partition(rng, d))))
                 for _ in times)
    hset = build_history_set(ChainSpec(tuple(times), fams), U, n)
    assert all(c.within_bound for c in compare_epe_dh(hset, psi))
    assert dh_probabilities(branch_vectors(hset, psi)).min() >= 0


def test_monomial_dynamics_exactly_decoherent():
    rng = np.random.default_rng(8)
    b = ConfigBasis(5)
    U = Propagator.from_unitary(oracles.random_monomial(rng, 5), b)
    psi = StateVector(b, oracles.random_state(rng, 5))
    F = ProjectorFamily(b, ((0, 1), (2,), (3, 4)))
    hset = build_history_set(ChainSpec((1, 2, 3), (F, F, F)), U, 3)
    cert = certify_medium_decoherence(decoherence_matrix(branch_vectors(hset, psi)), 1e-12)
    assert cert.decoherent and cert.bound < 1e-12
    assert linear_positivity_check(hset, psi).all_nonneg


def test_decoherence_rows(fixq2):
    one, two, whole, psi = _sets(fixq2)
    rows = []

    class Sink:
        writerow = rows.append

    write_decoherence_rows(Sink, decoherence_matrix(branch_vectors(two, psi)), "c")
    assert len(rows) == 16
    assert rows[0][:3] == ["c", "0-0", "0-0"]
    assert float(rows[1][3]) + 1j * float(rows[1][4]) != 0
