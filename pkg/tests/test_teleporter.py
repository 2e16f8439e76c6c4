import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catport.config import PreconditionError
from catport.entmetrics import isotropic_twirl, max_entangled, singlet_fraction, tele_fidelity
from catport.qstate import DensityMatrix, haar_random_pure, maximally_mixed, random_density_matrix
from catport.teleporter import (
    PauliFrame,
    _fidelities,
    avg_fidelity_mc,
    depolarizing_parameter,
    teleport,
    teleport_povm,
)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_frame_orthogonality(d):
    us = PauliFrame(d).unitaries
    assert len(us) == d * d
    for a, ua in enumerate(us):
        assert np.allclose(ua @ ua.conj().T, np.eye(d), atol=1e-12)
        for b, ub in enumerate(us):
            assert abs(np.trace(ua.conj().T @ ub) - d * (a == b)) < 1e-10


@pytest.mark.parametrize("d", [2, 3, 5])
def test_povm_complete_rank_one(d):
    els = teleport_povm(PauliFrame(d))
    assert np.allclose(sum(els), np.eye(d * d), atol=1e-10)
    for m in els:
        assert abs(np.trace(m) - 1) < 1e-12
        assert np.linalg.matrix_rank(m, tol=1e-9) == 1
        assert np.linalg.eigvalsh(m).min() > -1e-12


def test_qubit_povm_is_bell_basis():
    els = teleport_povm(PauliFrame(2))
    s = 1 / math.sqrt(2)
    bells = [np.array(v) * s for v in ([1, 0, 0, 1], [1, 0, 0, -1], [0, 1, 1, 0], [0, 1, -1, 0])]
    for b in bells:
        proj = np.outer(b, b)
        assert any(np.allclose(proj, m, atol=1e-12) for m in els)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_perfect_teleportation(d):
    frame = PauliFrame(d)
    for seed in range(5):
        phi = haar_random_pure(d, seed)
        out = teleport(max_entangled(d).dm(), phi, frame)
        assert np.allclose(out.mat, phi.dm().mat, atol=1e-10)


def test_maximally_mixed_resource_depolarizes_fully():
    frame = PauliFrame(3)
    for seed in range(3):
        out = teleport(maximally_mixed((3, 3)), haar_random_pure(3, seed), frame)
        assert np.allclose(out.mat, np.eye(3) / 3, atol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(PreconditionError):
        teleport(maximally_mixed((2, 2)), haar_random_pure(3, 0), PauliFrame(3))


@given(st.integers(0, 10_000))
@settings(max_examples=15, deadline=None)
def test_output_valid_and_batch_consistent(seed):
    rho = random_density_matrix((3, 3), seed)
    frame = PauliFrame(3)
    r = np.random.default_rng(seed)
    psis = np.stack([haar_random_pure(3, r).vec for _ in range(4)])
    batch = _fidelities(rho.mat, psis, frame)
    for psi, f in zip(psis, batch):
        out = teleport(rho, DensityMatrix(np.outer(psi, psi.conj())), frame)
        assert out.eigenvalues().min() >= 0
        assert abs(np.real(psi.conj() @ out.mat @ psi) - f) < 1e-12


def test_isotropic_resource_gives_depolarizing_channel():
    rho = isotropic_twirl(random_density_matrix((3, 3), 11))
    p, resid = depolarizing_parameter(rho)
    assert resid < 1e-8
    # p relates to the singlet fraction: F = p + (1 - p)/d
    f = singlet_fraction(rho)
    assert abs(p + (1 - p) / 3 - tele_fidelity(f, 3)) < 1e-10


def test_mc_maximally_entangled():
    mean, err = avg_fidelity_mc(max_entangled(3).dm(), samples=1000, seed=1)
    assert abs(mean - 1) < 1e-12 and err < 1e-12


def test_mc_singlet_in_qutrits():
    rho = max_entangled(3, levels=2).dm()
    mean, err = avg_fidelity_mc(rho, samples=10_000, seed=7)
    assert abs(mean - 0.75) <= 3 * err + 1e-12
    assert abs(mean - 0.75) < 0.01


def test_mc_untwirled_is_genuinely_statistical():
    # without the twirl the fidelity varies with the input; its Haar mean
    # for this state still equals (f d + 1)/(d + 1)
    rho = max_entangled(3, levels=2).dm()
    mean, err = avg_fidelity_mc(rho, samples=10_000, seed=3, twirl=False)
    assert err > 1e-4
    assert abs(mean - 0.75) <= 3 * err


def test_mc_deterministic_and_validated():
    rho = random_density_matrix((2, 2), 0)
    assert avg_fidelity_mc(rho, 500, seed=9) == avg_fidelity_mc(rho, 500, seed=9)
    with pytest.raises(PreconditionError):
        avg_fidelity_mc(rho, 50)


@pytest.mark.parametrize("seed", range(4))
def test_mc_matches_formula_for_random_states(seed):
    rho = random_density_matrix((3, 3), seed)
    mean, err = avg_fidelity_mc(rho, samples=2000, seed=seed)
    assert abs(mean - tele_fidelity(singlet_fraction(rho), 3)) <= 3 * err + 1e-12
