import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epe.classical import (ClassicalEnsemble, all_classical_weights, classical_coarse_probability,
                           classical_summary, classical_weight, table_comparison)
from epe.errors import InvalidFamilyError


def test_identity_dynamics():
    ens = ClassicalEnsemble(4, [0, 1, 2, 3], [0.25] * 4, n_steps=2)
    assert classical_weight((2, 2, 2), ens) == 0.25
    assert classical_weight((2, 1, 2), ens) == 0.0
    assert math.fsum(all_classical_weights(ens)) == pytest.approx(1, abs=1e-12)


def test_shift_orbits():
    ens = ClassicalEnsemble(3, [1, 2, 0], [0.5, 0.3, 0.2], n_steps=3)
    assert classical_weight((0, 1, 2, 0), ens) == 0.5
    assert classical_weight((0, 2, 1, 0), ens) == 0.0
    assert ens.orbit(2) == (2, 0, 1, 2)
    with pytest.raises(ValueError):
        classical_weight((0, 1), ens)


def test_invalid_ensembles():
    with pytest.raises(ValueError):
        ClassicalEnsemble(3, [0, 0, 1], [1 / 3] * 3)
    with pytest.raises(ValueError):
        ClassicalEnsemble(2, [0, 1], [0.7, 0.4])
    with pytest.raises(ValueError):
        ClassicalEnsemble(2, [0, 1], [1.2, -0.2])


def test_coarse_probabilities():
    ens = ClassicalEnsemble(4, [1, 2, 3, 0], [0.25] * 4, n_steps=2)
    _, p = classical_coarse_probability([(0, [[0, 1, 2, 3]])], ens)
    assert p.tolist() == [1.0]
    labels, p = classical_coarse_probability([(0, [[0, 1], [2, 3]])], ens)
    assert p[labels.index((0,))] == 0.5
    # starting in {0} and being in {0} one step later is impossible under the shift
    labels, p = classical_coarse_probability([(0, [[0], [1, 2, 3]]), (1, [[0], [1, 2, 3]])], ens)
    assert p[labels.index((0, 0))] == 0.0
    with pytest.raises(InvalidFamilyError):
        classical_coarse_probability([(0, [[0, 1], [1, 2, 3]])], ens)
    with pytest.raises(InvalidFamilyError):
        classical_coarse_probability([(3, [[0, 1, 2, 3]])], ens)


@st.composite
def ensembles(draw):
    m = draw(st.integers(1, 6))
    perm = draw(st.permutations(list(range(m))))
    raw = draw(st.lists(st.floats(0, 1), min_size=m, max_size=m).filter(lambda r: sum(r) > 0.01))
    rho = np.array(raw) / math.fsum(raw)
    rho[-1] = 1 - math.fsum(rho[:-1])
    rho = np.clip(rho, 0, None)
    return ClassicalEnsemble(m, perm, rho / math.fsum(rho), draw(st.integers(1, 3)))


@settings(max_examples=60, deadline=None)
@given(ensembles(), st.randoms())
def test_weights_and_sum_rules(ens, rnd):
    w = all_classical_weights(ens)
    assert w.min() >= 0 and w.max() <= 1
    assert math.fsum(w) == pytest.approx(1, abs=1e-12)
    owner = [rnd.randrange(3) for _ in range(ens.phase_dim)]
    cells = [[i for i in range(ens.phase_dim) if owner[i] == c] for c in range(3)]
    cells = [c for c in cells if c]
    k = rnd.randrange(ens.n_steps + 1)
    labels, p = classical_coarse_probability([(k, cells)], ens)
    assert p.min() >= 0 and math.fsum(p) == pytest.approx(1, abs=1e-12)
    # merging two cells adds their probabilities
    if len(cells) > 1:
        merged = [cells[0] + cells[1]] + cells[2:]
        _, q = classical_coarse_probability([(k, merged)], ens)
        assert q[0] == pytest.approx(p[0] + p[1], abs=1e-15)


def test_table_flags(fixq2):
    from epe.paths import TimeGrid, weight_table
    basis, U, psi0 = fixq2
    tab = weight_table(psi0, U, TimeGrid(2, math.pi / 8, basis))
    quantum = {"n_paths": 8, "total_weight": tab.total, "min_weight": float(tab.weights.min()),
               "max_weight": float(tab.weights.max()),
               "n_negative": int((tab.weights < 0).sum())}
    ens = ClassicalEnsemble(3, [1, 2, 0], [0.9, 0.05, 0.05], 2)
    rep = table_comparison(quantum, classical_summary(ens, [(0, [[1], [0, 2]])], 1))
    assert not rep["classical"]["fundamental_distribution"]["negative"]
    assert rep["quantum"]["fundamental_distribution"]["negative"]
    assert rep["quantum"]["fundamental_distribution"]["min_weight"] == pytest.approx(-0.1036, abs=1e-4)
    for col in ("classical", "quantum"):
        assert rep[col]["normalization"] == pytest.approx(1, abs=1e-9)
    assert rep["classical"]["coarse_grained_standard"]
    assert rep["classical"]["settleable_sets"].startswith("in principle")
    assert rep["quantum"]["settleable_sets"].startswith("recorded")
    assert rep["classical"]["fine_grained_settleable"] is True
    assert rep["quantum"]["fine_grained_settleable"] is False
    assert rep["classical"]["real_fine_grained_history"] == [1, 2, 0]


def test_every_path_enumerated():
    ens = ClassicalEnsemble(3, [2, 0, 1], [0.2, 0.3, 0.5], 1)
    w = all_classical_weights(ens)
    paths = list(itertools.product(range(3), repeat=2))
    assert [classical_weight(p, ens) for p in paths] == w.tolist()
