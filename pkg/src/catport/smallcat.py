"""Qutrit small-catalyst protocol.

The catalyst is a pair of qutrits ``A_2 B_2`` plus a two-valued classical
register ``M``::

    omega = 1/2 gamma (x) |1><1|_M + 1/2 psi (x) |2><2|_M,
    gamma = x phi+ + (1 - x) |00><00|,

with ``psi`` a two-level maximally entangled state embedded in two qutrits.
A one-way LOCC map sends ``psi (x) psi`` to

    |phi~> = sqrt(x) |00> |phi+> + sqrt(1 - x) |11> |00>,

and after the register relabeling the system is left in
``(gamma + gamma') / 2`` with ``gamma' = tr_{A_2 B_2} phi~``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catengine import (
    MultiCopyChannel,
    ProtocolReport,
    build_catalyst,
    catalyst_matrix,
    one_way_locc,
    run_subroutine,
)
from .config import InfeasibleError, PreconditionError, get_settings
from .entmetrics import majorizes, max_entangled, singlet_fraction, tele_fidelity
from .linalg import dagger, svd
from .qstate import DensityMatrix, PureState, SchmidtSpectrum, ptrace

D = 3
X_MIN = 0.75


@dataclass(frozen=True, eq=False)
class SmallCatScenario:
    x: float
    psi: PureState
    gamma: DensityMatrix
    omega: DensityMatrix  # dims (3, 3, 2), register last
    phi_tilde: PureState  # dims (3, 3, 3, 3), ordered A_1 B_1 A_2 B_2


def _phi_tilde(x: float) -> PureState:
    e0 = np.eye(D)[0]
    e1 = np.eye(D)[1]
    v = math.sqrt(x) * np.kron(np.kron(e0, e0), max_entangled(D).vec)
    v = v + math.sqrt(1 - x) * np.kron(np.kron(e1, e1), np.kron(e0, e0))
    return PureState(v, (D,) * 4)


def small_catalyst_scenario(x: float) -> SmallCatScenario:
    """States of the qutrit example at mixing parameter ``x`` in ``[0, 1]``."""
    if not 0 <= x <= 1:
        raise PreconditionError(f"x must lie in [0, 1], got {x}")
    psi = max_entangled(D, levels=2)
    phi = max_entangled(D).dm().mat
    ground = np.zeros((D * D, D * D))
    ground[0, 0] = 1
    gamma = DensityMatrix(x * phi + (1 - x) * ground, (D, D))
    omega = 0.5 * np.kron(gamma.mat, np.diag([1, 0])) + 0.5 * np.kron(psi.dm().mat, np.diag([0, 1]))
    return SmallCatScenario(x, psi, gamma, DensityMatrix(omega, (D, D, 2)), _phi_tilde(x))


def _coefficient_matrix(state: PureState, n: int, da: int, db: int) -> np.ndarray:
    # pair-major [a1, b1, ..., an, bn] -> rows (a1..an), cols (b1..bn)
    t = state.vec.reshape([da, db] * n)
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return t.transpose(perm).reshape(da**n, db**n)


def _robin_hood(source: np.ndarray, target: np.ndarray) -> list[tuple[int, int, float]]:
    """T-transforms ``(j, k, w)`` with ``source = T_m ... T_1 target``.

    ``T = (1 - w) 1 + w P_{jk}``; both inputs sorted descending.
    """
    floor = get_settings().transfer_floor
    c = target.astype(float).copy()
    steps = []
    for _ in range(c.size):
        above = np.nonzero(c - source > floor)[0]
        if above.size == 0:
            break
        j = int(above[-1])
        below = np.nonzero(source[j + 1:] - c[j + 1:] > floor)[0]
        if below.size == 0:
            break
        k = j + 1 + int(below[0])
        delta = min(c[j] - source[j], source[k] - c[k])
        w = delta / (c[j] - c[k])
        c[j] -= delta
        c[k] += delta
        steps.append((j, k, w))
    return steps


def _permutation_mixture(steps, size: int) -> dict[tuple[int, ...], float]:
    """Expand a product of T-transforms into ``{perm: weight}``.

    ``perm`` maps new position to old one, so ``(P y)[i] = y[perm[i]]``.
    """
    mix = {tuple(range(size)): 1.0}
    for j, k, w in steps:
        nxt: dict[tuple[int, ...], float] = {}
        for perm, p in mix.items():
            swapped = list(perm)
            swapped[j], swapped[k] = swapped[k], swapped[j]
            for key, q in ((perm, p * (1 - w)), (tuple(swapped), p * w)):
                if q > 0:
                    nxt[key] = nxt.get(key, 0.0) + q
        mix = nxt
    return mix


def nielsen_locc(source: SchmidtSpectrum, target: SchmidtSpectrum, source_state: PureState,
                 target_state: PureState, n: int | None = None) -> MultiCopyChannel:
    """One-way LOCC instrument taking ``source_state`` to ``target_state``.

    Parameters
    ----------
    source, target : SchmidtSpectrum
        Spectra across the Alice : Bob cut; must agree with the states.
    source_state, target_state : PureState
        Pair-major states on ``n`` pairs ``[d_A, d_B] * n`` (``n`` inferred
        from the dims when omitted).

    Raises
    ------
    InfeasibleError
        If ``target`` does not majorize ``source``.
    """
    if source_state.dims != target_state.dims:
        raise PreconditionError("source and target states must share their factorization")
    dims = source_state.dims
    if n is None:
        n = len(dims) // 2
    if len(dims) != 2 * n or dims[0::2] != dims[:1] * n or dims[1::2] != dims[1:2] * n:
        raise PreconditionError(f"dims {dims} are not {n} identical pairs")
    da, db = dims[0], dims[1]
    if da != db:
        raise PreconditionError("the construction needs equal local dimensions")
    if not majorizes(target, source):
        raise InfeasibleError("target spectrum does not majorize the source spectrum")

    s_mat = _coefficient_matrix(source_state, n, da, db)
    t_mat = _coefficient_matrix(target_state, n, da, db)
    us, ss, vs = svd(s_mat)
    ut, st, vt = svd(t_mat)
    for given, sv in ((source, ss), (target, st)):
        if np.max(np.abs(SchmidtSpectrum(given).padded(sv.size) - sv**2)) > 1e-9:
            raise PreconditionError("declared spectrum does not match the state")

    size = ss.size
    steps = _robin_hood(ss**2, st**2)
    mix = _permutation_mixture(steps, size)
    tol = get_settings().tol_rank
    inv = np.where(ss > tol, 1 / np.where(ss > tol, ss, 1), 0.0)
    kernel = np.diag((ss <= tol).astype(float))
    alice, bob = [], []
    for idx, (perm, p) in enumerate(sorted(mix.items())):
        pm = np.eye(size)[list(perm)]  # (pm @ y)[i] = y[perm[i]]
        d_perm = np.diag(pm @ st)
        k = math.sqrt(p) * d_perm @ np.diag(inv)
        if idx == 0:
            k = k + kernel
        alice.append(ut @ pm.T @ k @ dagger(us))
        bob.append((vs @ pm @ dagger(vt)).T)
    return one_way_locc(alice, bob, n, (da, db))


def _closed_form(x: float) -> float:
    return (1 + math.sqrt(x * (1 - x) / 3) + x) / 3


def scenario_channel(sc: SmallCatScenario) -> MultiCopyChannel:
    src_vec = np.kron(sc.psi.vec, sc.psi.vec)
    src = PureState(src_vec, (D,) * 4)
    lam_s = SchmidtSpectrum(np.kron(_spectrum_of(sc.psi), _spectrum_of(sc.psi)))
    lam_t = SchmidtSpectrum(_spectrum_of(sc.phi_tilde))
    return nielsen_locc(lam_s, lam_t, src, sc.phi_tilde)


def _spectrum_of(state: PureState) -> np.ndarray:
    n = len(state.dims) // 2
    _, s, _ = svd(_coefficient_matrix(state, n, state.dims[0], state.dims[1]))
    return s**2


def run_small_catalyst(x: float) -> ProtocolReport:
    """Run the single-shot qutrit protocol at mixing parameter ``x``.

    The catalyst blocks are rebuilt from the synthesized channel and
    compared against the closed-form ``omega``; ``extras`` carries
    ``x``, the singlet fraction, the teleportation fidelity and the
    closed-form value.
    """
    if not X_MIN <= x <= 1:
        raise PreconditionError(f"x must lie in [3/4, 1], got {x}")
    sc = small_catalyst_scenario(x)
    E = scenario_channel(sc)
    rho = sc.psi.dm()
    cat = build_catalyst(rho, E, 2, layout="suffix")
    omega_built = catalyst_matrix(cat)
    report = run_subroutine(rho, cat, E)
    after = sum(np.kron(c.mat, np.diag(np.eye(2)[i]) / 2) for i, c in enumerate(report.catalyst_after))
    f = singlet_fraction(report.system_out)
    report.extras.update(
        x=float(x),
        singlet_fraction=f,
        tele_fidelity=tele_fidelity(min(f, 1.0), D),
        closed_form=_closed_form(x),
        gamma_prime=_gamma_prime_check(sc),
        catalyst_vs_closed_form=float(0.5 * np.abs(np.linalg.eigvalsh(omega_built - sc.omega.mat)).sum()),
        catalyst_drift_vs_closed_form=float(0.5 * np.abs(np.linalg.eigvalsh(after - sc.omega.mat)).sum()),
        branches=E.branches,
    )
    return report


def _gamma_prime_check(sc: SmallCatScenario) -> float:
    # max deviation of tr_{A_2 B_2} phi~ from its closed form
    x = sc.x
    gp = ptrace(sc.phi_tilde.dm().mat, (D,) * 4, [0, 1])
    c = math.sqrt(x * (1 - x) / 3)
    ref = np.zeros((D * D, D * D))
    i00, i11 = 0, D + 1
    ref[i00, i00], ref[i11, i11] = x, 1 - x
    ref[i00, i11] = ref[i11, i00] = c
    return float(np.max(np.abs(gp - ref)))


def gamma_prime(x: float) -> DensityMatrix:
    sc = small_catalyst_scenario(x)
    return DensityMatrix(ptrace(sc.phi_tilde.dm().mat, (D,) * 4, [0, 1]), (D, D))


def optimize_x() -> tuple[float, float, float]:
    """Best mixing parameter in ``[3/4, 1]`` for the closed-form fraction.

    Stationarity gives ``16 x^2 - 16 x + 1 = 0``; the interior root is
    compared against both endpoints.
    """
    roots = [0.5 + math.sqrt(3) / 4, 0.5 - math.sqrt(3) / 4]
    cands = [r for r in roots if X_MIN <= r <= 1] + [X_MIN, 1.0]
    x_star = max(cands, key=_closed_form)
    f_star = _closed_form(x_star)
    return x_star, f_star, tele_fidelity(f_star, D)


def majorization_feasible(x: float) -> bool:
    """Whether ``lambda(psi (x) psi)`` is majorized by ``lambda(phi~)``."""
    sc = small_catalyst_scenario(x)
    src = np.kron(_spectrum_of(sc.psi), _spectrum_of(sc.psi))
    return majorizes(_spectrum_of(sc.phi_tilde), src)


def relabel(blocks):
    """Register relabeling on joint blocks ``[M=1, M=2]`` over ``A_1B_1 A_2B_2``.

    ``M=1`` goes to ``M=2`` with the two pairs exchanged; ``M=2`` goes to
    ``M=1`` unchanged.
    """
    from .catengine import swap_pairs

    b1, b2 = blocks
    return [b2, swap_pairs(b1, D * D, 2, 0, 1)]


__all__ = [
    "SmallCatScenario",
    "small_catalyst_scenario",
    "nielsen_locc",
    "run_small_catalyst",
    "optimize_x",
    "majorization_feasible",
    "gamma_prime",
    "relabel",
    "scenario_channel",
]
