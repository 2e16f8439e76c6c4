import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catport.catengine import build_catalyst, random_locc_channel, run_subroutine, identity_channel
from catport.config import BoundaryError, DimensionLimitError, PreconditionError, use_settings
from catport.entmetrics import max_entangled_projector, singlet_fraction
from catport.gencat import (
    Observable,
    catalytic_expectation,
    collective_ergotropy,
    entropy_matched_gibbs,
    ergotropy,
    gibbs_state,
    passive_energy,
    sorting_unitary,
    total_energy,
    unitary_channel,
    work_report,
)
from catport.qstate import DensityMatrix, haar_random_unitary, random_density_matrix, von_neumann_entropy
from oracles import brute_force_passive_energy, exact_collective_ergotropy, kron_n

H3 = np.diag([0.0, 1.0, 2.0])
RHO3 = DensityMatrix(np.diag([0.5, 0.3, 0.2]))


def brute_force_collective(p, e, n):
    pn = kron_n([np.diag(p)] * n).diagonal().real
    en = sum(np.kron(np.kron(np.ones(len(e) ** i), e), np.ones(len(e) ** (n - i - 1))) for i in range(n))
    return (float(pn @ en) - brute_force_passive_energy(pn, en)) / n


def test_observable_validation():
    with pytest.raises(PreconditionError):
        Observable(np.array([[0, 1], [0, 0]]))
    o = Observable(H3, "hamiltonian")
    assert np.allclose(o.energies(), [0, 1, 2])


def test_ergotropy_examples():
    assert abs(ergotropy(DensityMatrix(np.diag([0.3, 0.7])), np.diag([0, 1])) - 0.4) < 1e-15
    assert abs(ergotropy(gibbs_state(H3, 0.8), H3)) < 1e-12
    assert abs(ergotropy(RHO3, H3)) < 1e-15


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_ergotropy_matches_permutation_brute_force(seed):
    r = np.random.default_rng(seed)
    p = r.dirichlet(np.ones(4))
    e = np.sort(r.uniform(0, 3, 4))
    u = haar_random_unitary(4, r)
    rho = DensityMatrix(u @ np.diag(p) @ u.conj().T)
    H = u @ np.diag(e) @ u.conj().T
    assert abs(ergotropy(rho, H) - (p @ e - brute_force_passive_energy(p, e))) < 1e-10


@pytest.mark.parametrize("n", [1, 2])
def test_collective_matches_brute_force(n):
    for p, e in [((0.6, 0.22, 0.18), (0, 1, 3)), ((0.5, 0.3, 0.2), (0, 1, 2)), ((0.7, 0.2, 0.1), (0, 0.4, 2))]:
        rho = DensityMatrix(np.diag(p))
        assert abs(collective_ergotropy(rho, np.diag(e), n) - brute_force_collective(p, np.array(e, float), n)) < 1e-12


def test_collective_n1_is_ergotropy():
    rho = random_density_matrix((3,), 2)
    H = np.diag([0, 0.5, 1.7])
    assert abs(collective_ergotropy(rho, H, 1) - ergotropy(rho, H)) < 1e-15


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gibbs_is_completely_passive(n):
    assert abs(collective_ergotropy(gibbs_state(H3, 1.3), H3, n)) < 1e-12


def test_passive_state_zero_below_nine_copies():
    # the exact sort shows activation for this state only from n = 9 on
    with use_settings(max_dim=3**9):
        vals = [collective_ergotropy(RHO3, H3, n) for n in range(1, 10)]
    assert max(abs(v) for v in vals[:8]) < 1e-12
    exact = float(exact_collective_ergotropy([5, 3, 2], 10, [0, 1, 2], 9))
    assert exact > 3e-8 and abs(vals[8] - exact) < 1e-12
    assert all(exact_collective_ergotropy([5, 3, 2], 10, [0, 1, 2], n) == 0 for n in range(1, 9))


def test_activation_at_two_copies():
    rho = DensityMatrix(np.diag([0.6, 0.22, 0.18]))
    H = np.diag([0.0, 1.0, 3.0])
    assert abs(ergotropy(rho, H)) < 1e-15
    w2 = collective_ergotropy(rho, H, 2)
    assert w2 > 0.02
    assert abs(w2 - float(exact_collective_ergotropy([30, 11, 9], 50, [0, 1, 3], 2))) < 1e-15
    assert abs(w2 - brute_force_collective([0.6, 0.22, 0.18], np.array([0, 1, 3.0]), 2)) < 1e-12


def test_dimension_cap():
    with use_settings(max_dim=27):
        collective_ergotropy(RHO3, H3, 3)
        with pytest.raises(DimensionLimitError):
            collective_ergotropy(RHO3, H3, 4)


def test_total_energy_spectrum():
    T = total_energy(H3, 2)
    assert np.allclose(np.sort(np.linalg.eigvalsh(T)), np.sort(np.add.outer([0, 1, 2], [0, 1, 2]).ravel()))


@pytest.mark.parametrize("n", [2, 3])
def test_sorting_unitary_reaches_passive_energy(n):
    rho = random_density_matrix((3,), 4)
    H = np.diag([0, 0.7, 1.9])
    U = sorting_unitary(rho, H, n)
    assert np.allclose(U @ U.conj().T, np.eye(3**n), atol=1e-10)
    out = U @ kron_n([rho.mat] * n) @ U.conj().T
    assert abs(np.trace(out @ total_energy(H, n)).real - passive_energy(rho, H, n)) < 1e-10


def test_catalytic_expectation_identity():
    rho = random_density_matrix((3,), 1)
    val, drift = catalytic_expectation(rho, H3, identity_channel(2, (3, 1)))
    assert abs(val - rho.expect(H3)) < 1e-12 and drift < 1e-12


@pytest.mark.parametrize("layout", ["prefix", "suffix"])
def test_catalytic_expectation_with_sorting_unitary(layout):
    rho = DensityMatrix(np.diag([0.6, 0.22, 0.18]))
    H = np.diag([0.0, 1.0, 3.0])
    E = unitary_channel(sorting_unitary(rho, H, 2), 2, 3)
    val, drift = catalytic_expectation(rho, H, E, layout=layout)
    assert abs(val - (rho.expect(H) - collective_ergotropy(rho, H, 2))) < 1e-9
    assert drift <= 1e-10


def test_catalytic_expectation_three_copies():
    E = unitary_channel(sorting_unitary(RHO3, H3, 3), 3, 3)
    val, drift = catalytic_expectation(RHO3, H3, E)
    assert abs(val - passive_energy(RHO3, H3, 3) / 3) < 1e-9 and drift <= 1e-10


@pytest.mark.parametrize("seed", range(3))
def test_singlet_projector_matches_catengine(seed):
    rho = random_density_matrix((2, 2), seed)
    E = random_locc_channel(2, (2, 2), seed=seed + 10)
    rep = run_subroutine(rho, build_catalyst(rho, E), E)
    val, drift = catalytic_expectation(rho, Observable(max_entangled_projector(2), "singlet"), E)
    assert abs(val - singlet_fraction(rep.system_out)) < 1e-9 and drift <= 1e-10


def test_gibbs_fixed_point():
    for beta in (0.3, 1.0, 2.5):
        tau, b = entropy_matched_gibbs(gibbs_state(H3, beta), H3)
        assert abs(b - beta) < 1e-6
        assert np.allclose(tau.mat, gibbs_state(H3, beta).mat, atol=1e-8)


def test_gibbs_entropy_match():
    tau, beta = entropy_matched_gibbs(RHO3, H3)
    assert abs(von_neumann_entropy(tau) - von_neumann_entropy(RHO3)) < 1e-8
    assert beta > 0


def test_gibbs_boundaries():
    tau, beta = entropy_matched_gibbs(DensityMatrix(np.eye(3) / 3), H3)
    assert beta == 0 and np.allclose(tau.mat, np.eye(3) / 3)
    with pytest.raises(BoundaryError) as err:
        entropy_matched_gibbs(DensityMatrix(np.diag([1.0, 0, 0])), H3)
    assert err.value.limit == math.inf
    with pytest.raises(PreconditionError):
        entropy_matched_gibbs(RHO3, np.eye(3))


def test_gibbs_wide_spectrum_bracket():
    # a huge gap forces the bracket to widen
    H = np.diag([0.0, 1e-3, 1e3])
    rho = DensityMatrix(np.diag([0.6, 0.399, 0.001]))
    tau, beta = entropy_matched_gibbs(rho, H)
    assert abs(von_neumann_entropy(tau) - von_neumann_entropy(rho)) < 1e-8


def test_work_report_invariants():
    for p, e in [((0.5, 0.3, 0.2), (0, 1, 2)), ((0.6, 0.22, 0.18), (0, 1, 3))]:
        rep = work_report(DensityMatrix(np.diag(p)), np.diag(e), n_max=3)
        assert rep.single_copy == rep.per_copy_collective[1]
        energies = [rep.per_copy_energy[n] for n in (1, 2, 3)]
        assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))
        for n in (1, 2, 3):
            assert rep.per_copy_collective[n] >= -1e-10
            assert rep.per_copy_collective[n] <= rep.free_energy_gap + 1e-8
        d = rep.to_dict()
        assert set(d["per_copy_collective"]) == {"1", "2", "3"}


def test_work_report_reference_values():
    rep = work_report(RHO3, H3)
    assert abs(rep.gibbs_beta - 0.4671) < 1e-4
    assert abs(rep.free_energy_gap - 5.879e-4) < 1e-6
