import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epe.decoherence import (branch_vectors, certify_medium_decoherence, decoherence_matrix,
                             dh_probabilities)
from epe.errors import ImpossiblePastError, NotRecordedError, UnconditionedPastError
from epe.hilbert import (ConfigBasis, Hamiltonian, ProjectorFamily, Propagator, StateVector,
                         build_propagator)
from epe.histories import ChainSpec, build_history_set
from epe.records import (NonDecoherentWarning, PointerModel, attach_pointer,
                         conditional_probability, conditional_probability_from_state,
                         conditional_state, construct_records, diagonal_records,
                         record_history_correlation, verify_records)
from epe.scenario import builtin, parse_scenario

import oracles

S8 = math.sin(math.pi / 8)


def _fine(basis, times):
    return ChainSpec(tuple(times), tuple(ProjectorFamily.fine(basis) for _ in times))


def test_orthogonal_branches_are_records(fixq2):
    basis, U, psi = fixq2
    hset = build_history_set(_fine(basis, [1]), U, 2)
    br = branch_vectors(hset, psi)
    R = construct_records(br)
    for a in range(2):
        assert np.max(np.abs(R.projectors[a] @ psi.amplitudes - br.vectors[:, a])) < 1e-12
    assert R.orthogonality_defect() < 1e-12
    assert R.completeness_defect() < 1e-12
    assert verify_records(R, hset, psi, 1e-8).verified


def test_single_branch_record_is_state_projector(fixq2):
    basis, U, psi = fixq2
    hset = build_history_set(ChainSpec((1,), (ProjectorFamily.whole(basis),)), U, 2)
    R = construct_records(branch_vectors(hset, psi))
    assert np.max(np.abs(R.projectors[0] - np.outer(psi.amplitudes, psi.amplitudes.conj()))) < 1e-12
    assert R.fidelity[0] < 1e-12


def test_fixq2_two_time_not_recorded(fixq2):
    basis, U, psi = fixq2
    hset = build_history_set(_fine(basis, [1, 2]), U, 2)
    R = construct_records(branch_vectors(hset, psi))
    assert R.fidelity.max() > 0.01
    assert not verify_records(R, hset, psi, 1e-3)


def test_symmetric_orthonormalization_oracle():
    # four generic branches in four dimensions: all independent, all kept
    b = ConfigBasis(4)
    rng = np.random.default_rng(5)
    U = build_propagator(Hamiltonian(b, oracles.random_hermitian(rng, 4)), 0.6)
    psi = StateVector(b, oracles.random_state(rng, 4))
    F = ProjectorFamily(b, ((0, 1), (2, 3)))
    hset = build_history_set(ChainSpec((1, 2), (F, F)), U, 2)
    V = branch_vectors(hset, psi).vectors
    w, E = np.linalg.eigh(V.conj().T @ V)
    Q = V @ (E / np.sqrt(w)) @ E.conj().T
    R = construct_records(branch_vectors(hset, psi))
    for a in range(4):
        assert np.max(np.abs(R.projectors[a] - np.outer(Q[:, a], Q[:, a].conj()))) < 1e-10
    assert R.orthogonality_defect() < 1e-10
    assert R.completeness_defect() < 1e-12


def test_parallel_branches_get_one_record(fixq2):
    basis, U, psi = fixq2
    hset = build_history_set(_fine(basis, [1, 2]), U, 2)
    R = construct_records(branch_vectors(hset, psi))
    ranks = [round(np.trace(P).real) for P in R.projectors]
    assert sum(ranks) == 2 and set(ranks) <= {0, 1}


def _pointer_fix(fixq2, n=2, times=(1, 2)):
    basis, U, psi = fixq2
    chain = _fine(basis, times)
    model = PointerModel.from_family(ProjectorFamily.fine(basis))
    return attach_pointer(model, psi, U, n, 1, chain)


def test_identity_coupling_reproduces_d(fixq2):
    basis, U, psi = fixq2
    chain = _fine(basis, [1, 2])
    off = PointerModel.from_family(ProjectorFamily.fine(basis), enabled=False)
    setup = attach_pointer(off, psi, U, 2, 1, chain)
    D_big = decoherence_matrix(branch_vectors(setup.hset, setup.psi)).entries
    D = decoherence_matrix(branch_vectors(build_history_set(chain, U, 2), psi)).entries
    assert np.max(np.abs(D_big - D)) < 1e-14


def test_pointer_records_fixq2(fixq2):
    setup = _pointer_fix(fixq2)
    br = branch_vectors(setup.hset, setup.psi)
    cert = certify_medium_decoherence(decoherence_matrix(br), 1e-8)
    assert cert.decoherent
    R = diagonal_records(br, setup.record_family, setup.hset.steps)
    chk = verify_records(R, setup.hset, setup.psi, 1e-8)
    assert chk.verified and chk.decoherence_ok and chk.positivity_ok
    corr = record_history_correlation(R, setup.hset, setup.psi)
    p = setup.hset.probabilities(setup.psi)
    assert np.max(np.abs(corr[:-1] - np.diag(p))) < 1e-10
    assert np.max(np.abs(corr.sum(axis=0) - p)) < 1e-10


def test_two_slit_pointer_correlation_and_marginals():
    sc = parse_scenario(builtin("two-slit-pointer"))
    chain = sc.chains["slit-bin"]
    model = PointerModel.build(sc.system.basis, sc.records["trigger_cells"])
    setup = attach_pointer(model, sc.system.psi0, sc.system.propagator, sc.system.n_steps, 1, chain)
    br = branch_vectors(setup.hset, setup.psi)
    R = diagonal_records(br, setup.record_family, setup.hset.steps)
    corr = record_history_correlation(R, setup.hset, setup.psi)
    off = corr[:-1] - np.diag(np.diag(corr[:-1]))
    assert np.max(np.abs(off)) < 1e-8
    p = setup.hset.probabilities(setup.psi)
    # slit probabilities equal pointer-cell probabilities
    slit = [sum(p[i] for i, lab in enumerate(setup.hset.labels) if lab[0] == s) for s in (0, 1)]
    sys_hset = build_history_set(ChainSpec((1,), (chain.families[0],)), sc.system.propagator, 3)
    assert np.allclose(slit, sys_hset.probabilities(sc.system.psi0), atol=1e-10)
    d_sys = sc.system.basis.dim
    W = np.eye(setup.psi.basis.dim, dtype=complex)
    for s in setup.hset.steps:
        W = s @ W
    final = W @ setup.psi.amplitudes
    m = model.pointer_basis.dim
    pointer_p = [float(np.sum(np.abs(final.reshape(d_sys, m)[:, j + 1]) ** 2)) for j in range(2)]
    assert np.allclose(pointer_p, slit, atol=1e-10)


def test_conditional_state_examples(fixq2):
    basis, U, psi = fixq2
    hset = build_history_set(_fine(basis, [1]), U, 2)
    assert np.allclose(conditional_state((), hset, psi).amplitudes, psi.amplitudes)
    st_ = conditional_state((1,), hset, psi).amplitudes
    ref = U.matrix.conj().T @ np.diag([0, 1]) @ U.matrix @ psi.amplitudes
    assert np.allclose(st_, ref / np.linalg.norm(ref), atol=1e-12)
    b3 = ConfigBasis(3)
    frozen = Propagator.from_unitary(np.eye(3), b3)
    h3 = build_history_set(_fine(b3, [1]), frozen, 1)
    with pytest.raises(ImpossiblePastError):
        conditional_state((2,), h3, StateVector.basis_state(b3, 0))
    with pytest.raises(UnconditionedPastError):
        conditional_probability(None, (2,), h3, StateVector.basis_state(b3, 0))


def test_conditional_full_future_is_one(fixq2):
    basis, U, psi = fixq2
    hset = build_history_set(_fine(basis, [1, 2]), U, 2)
    with pytest.warns(NonDecoherentWarning):
        assert conditional_probability(None, (0,), hset, psi) == pytest.approx(1, abs=1e-12)
    with pytest.raises(NotRecordedError):
        conditional_probability_from_state(None, (0,), hset, psi, 1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
def test_decoherent_conditionals_agree_and_sum_to_one(d, n, seed):
    rng = np.random.default_rng(seed)
    b = ConfigBasis(d)
    U = Propagator.from_unitary(oracles.random_monomial(rng, d), b)
    psi = StateVector(b, oracles.random_state(rng, d))
    times = sorted(rng.choice(np.arange(1, n + 1), size=2, replace=False).tolist())
    fams = tuple(ProjectorFamily(b, tuple(map(tuple, oracles.random_partition(rng, d))))
                 for _ in times)
    hset = build_history_set(ChainSpec(tuple(times), fams), U, n)
    p = hset.probabilities(psi)
    for a in range(len(fams[0])):
        if sum(p[i] for i, lab in enumerate(hset.labels) if lab[0] == a) < 1e-9:
            continue
        parts = []
        for f in range(len(fams[1])):
            with warnings.catch_warnings():
                warnings.simplefilter("error", NonDecoherentWarning)
                r = conditional_probability([[f]], [a], hset, psi)
            s = conditional_probability_from_state([[f]], [a], hset, psi, 1e-8)
            assert abs(r - s) < 1e-9
            parts.append(r)
        assert math.fsum(parts) == pytest.approx(1, abs=1e-9)


def test_dh_matches_epe_for_pointer_records(fixq2):
    setup = _pointer_fix(fixq2)
    p = setup.hset.probabilities(setup.psi)
    assert np.allclose(p, dh_probabilities(branch_vectors(setup.hset, setup.psi)), atol=1e-12)
    assert p.min() >= 0
