import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catport.config import PreconditionError
from catport.entmetrics import (
    FidelityRecord,
    classical_threshold,
    isotropic_twirl,
    majorizes,
    max_entangled,
    max_entangled_projector,
    pure_ent_fraction,
    singlet_fraction,
    tele_fidelity,
)
from catport.qstate import DensityMatrix, PureState, haar_random_unitary, maximally_mixed, random_density_matrix, schmidt
from oracles import clifford_group, clifford_twirl, majorizes_fraction


def test_singlet_fraction_examples():
    assert abs(singlet_fraction(max_entangled(3).dm()) - 1) < 1e-12
    assert abs(singlet_fraction(maximally_mixed((3, 3))) - 1 / 9) < 1e-12
    assert abs(singlet_fraction(max_entangled(3, levels=2).dm()) - 2 / 3) < 1e-12
    with pytest.raises(PreconditionError):
        singlet_fraction(maximally_mixed((2, 3)))


def test_pure_ent_fraction_examples():
    assert abs(pure_ent_fraction([0.5, 0.5, 0], 3) - 2 / 3) < 1e-15
    assert abs(pure_ent_fraction(np.full(4, 0.25), 4) - 1) < 1e-15
    assert abs(pure_ent_fraction([1, 0, 0], 3) - 1 / 3) < 1e-15


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_pure_fraction_equals_overlap_in_schmidt_basis(seed):
    r = np.random.default_rng(seed)
    lam = r.dirichlet(np.ones(3))
    v = np.zeros(9)
    v[[0, 4, 8]] = np.sqrt(lam)
    psi = PureState(v, (3, 3))
    assert abs(pure_ent_fraction(lam, 3) - singlet_fraction(psi.dm())) < 1e-10
    assert np.allclose(schmidt(psi, [0]).lambdas, np.sort(lam)[::-1])


def test_tele_fidelity_examples():
    assert abs(tele_fidelity(2 / 3, 3) - 0.75) < 1e-15
    assert tele_fidelity(1, 5) == 1
    f = 0.5 + math.sqrt(3) / 9
    assert abs(tele_fidelity(f, 3) - (0.75 + (1 / math.sqrt(3) - 0.5) / 4)) < 1e-15
    assert round(tele_fidelity(f, 3), 2) == 0.77
    with pytest.raises(PreconditionError):
        tele_fidelity(1.5, 3)


@given(st.floats(0, 1), st.floats(0, 1), st.integers(2, 10))
def test_tele_fidelity_monotone(a, b, d):
    if b - a > 1e-12:
        assert tele_fidelity(a, d) < tele_fidelity(b, d)


def test_fidelity_record():
    rec = FidelityRecord.from_fraction(0.4, 3)
    assert abs(rec.tele_fidelity - (0.4 * 3 + 1) / 4) < 1e-12


def test_classical_threshold():
    assert classical_threshold(3) == 0.5
    assert abs(classical_threshold(2) - 2 / 3) < 1e-15
    vals = [classical_threshold(d) for d in range(2, 50)]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    with pytest.raises(PreconditionError):
        classical_threshold(1)


def test_twirl_fixed_points():
    phi = max_entangled(3).dm()
    assert np.allclose(isotropic_twirl(phi).mat, phi.mat, atol=1e-12)
    mm = maximally_mixed((3, 3))
    assert np.allclose(isotropic_twirl(mm).mat, mm.mat, atol=1e-12)


def test_clifford_oracle_is_a_group():
    g = clifford_group()
    assert len(g) == 24


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_twirl_matches_clifford_average(seed):
    rho = random_density_matrix((2, 2), seed)
    assert np.allclose(isotropic_twirl(rho).mat, clifford_twirl(rho.mat), atol=1e-12)


def test_twirl_commutes_with_sampled_unitaries():
    rho = random_density_matrix((2, 2), 3)
    out = isotropic_twirl(rho).mat
    rng = np.random.default_rng(4)
    for _ in range(24):
        u = haar_random_unitary(2, rng)
        w = np.kron(u, u.conj())
        assert np.max(np.abs(w @ out - out @ w)) < 1e-3


@given(st.integers(0, 10_000), st.integers(2, 4))
@settings(max_examples=20, deadline=None)
def test_twirl_idempotent_and_fraction_preserving(seed, d):
    rho = random_density_matrix((d, d), seed)
    t = isotropic_twirl(rho)
    assert np.allclose(isotropic_twirl(t).mat, t.mat, atol=1e-12)
    assert abs(np.trace(t.mat) - 1) < 1e-12
    assert abs(singlet_fraction(t) - singlet_fraction(rho)) < 1e-12


def test_majorizes_examples():
    src = [0.25] * 4
    assert majorizes([0.25, 0.25, 0.25, 0.25], src)
    lam = [0.5, 0.3, 0.2]
    assert majorizes(lam, lam)
    assert majorizes([1, 0, 0], lam)
    assert not majorizes(lam, [1, 0, 0])


def test_majorization_of_small_catalyst_spectra():
    # lambda(phi~) = (x/3, x/3, x/3, 1-x) dominates the uniform 4-level spectrum
    # for every x in [0, 1]; the exact rational oracle agrees
    from fractions import Fraction as Fr

    xs = (Fr(0), Fr(3, 10), Fr(1, 2), Fr(7, 10), Fr(3, 4) - Fr(1, 10**6), Fr(3, 4),
          Fr(3, 4) + Fr(1, 10**6), Fr(9, 10), Fr(1))
    for x in xs:
        tgt = [x / 3] * 3 + [1 - x]
        assert majorizes_fraction(tgt, [Fr(1, 4)] * 4)
        assert majorizes([float(t) for t in tgt], [0.25] * 4)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_majorization_partial_order(seed):
    r = np.random.default_rng(seed)
    a, b, c = (r.dirichlet(np.ones(4) * r.uniform(0.2, 3)) for _ in range(3))
    assert majorizes(a, a)
    assert majorizes(a, b) == majorizes_fraction(a, b) or abs(
        np.min(np.cumsum(np.sort(a)[::-1]) - np.cumsum(np.sort(b)[::-1]))) < 1e-10
    if majorizes(a, b) and majorizes(b, c):
        assert majorizes(a, c)
    if majorizes(a, b) and majorizes(b, a):
        assert np.allclose(np.sort(a), np.sort(b), atol=1e-9)


def test_projector():
    p = max_entangled_projector(3)
    assert np.allclose(p @ p, p)
    assert abs(np.trace(p) - 1) < 1e-12
