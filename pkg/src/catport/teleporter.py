"""Noisy qudit teleportation with a generalized-Pauli Bell measurement."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .config import PreconditionError
from .entmetrics import isotropic_twirl, max_entangled
from .linalg import dagger
from .qstate import DensityMatrix, PureState, as_density


@dataclass(frozen=True)
class PauliFrame:
    """The ``d**2`` Weyl operators ``X^j Z^k`` ordered by ``a = j * d + k``."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise PreconditionError("dimension must be >= 1")

    @cached_property
    def unitaries(self) -> tuple[np.ndarray, ...]:
        d = self.d
        x = np.roll(np.eye(d), 1, axis=0)  # X|i> = |i+1 mod d>
        z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
        return tuple(
            np.linalg.matrix_power(x, j) @ np.linalg.matrix_power(z, k)
            for j in range(d)
            for k in range(d)
        )

    @cached_property
    def bell_vectors(self) -> np.ndarray:
        # row a: (1 (x) U_a)|phi+>
        phi = max_entangled(self.d).vec
        eye = np.eye(self.d)
        return np.stack([np.kron(eye, u) @ phi for u in self.unitaries])

    @cached_property
    def corrections(self) -> tuple[np.ndarray, ...]:
        # outcome a leaves Bob with U_a^* |phi>, undone by U_a^T
        return tuple(u.T for u in self.unitaries)


def teleport_povm(frame: PauliFrame) -> list[np.ndarray]:
    """Rank-one elements ``(1 (x) U_a) phi+ (1 (x) U_a^dag)`` on ``R A``."""
    return [np.outer(v, v.conj()) for v in frame.bell_vectors]


def _bob_branches(rho_ab: np.ndarray, phi_r: np.ndarray, frame: PauliFrame) -> np.ndarray:
    # unnormalized Bob states tr_RA[(M_a (x) 1)(phi_R (x) rho_AB)], one per outcome
    d = frame.d
    m = frame.bell_vectors.reshape(-1, d, d)  # [a, r, alice]
    r4 = rho_ab.reshape(d, d, d, d)  # [alice, bob, alice', bob']
    return np.einsum("xra,rs,abcd,xsc->xbd", m.conj(), phi_r, r4, m, optimize=True)


def teleport(rho_ab, phi_r, frame: PauliFrame) -> DensityMatrix:
    """Bob's output state after measurement, one-way communication and correction."""
    rho_ab = as_density(rho_ab)
    phi = as_density(phi_r)
    d = frame.d
    if rho_ab.dims != (d, d) or phi.dim != d:
        raise PreconditionError(
            f"teleportation needs d_A = d_B = d_R = {d}; got {rho_ab.dims} and {phi.dims}"
        )
    branches = _bob_branches(rho_ab.mat, phi.mat, frame)
    out = sum(v @ b @ dagger(v) for v, b in zip(frame.corrections, branches))
    return DensityMatrix(out, (d,))


def _fidelities(rho_ab: np.ndarray, psis: np.ndarray, frame: PauliFrame) -> np.ndarray:
    # batched <psi| teleport(rho, psi) |psi> for rows of psis
    d = frame.d
    m = frame.bell_vectors.reshape(-1, d, d)
    r4 = rho_ab.reshape(d, d, d, d)
    u = np.einsum("xra,sr->sxa", m.conj(), psis)
    corr = np.stack(frame.corrections)
    # Bob's corrected branch amplitudes projected on psi: <psi|V_a
    w = np.einsum("sb,xbc->sxc", psis.conj(), corr)
    val = np.einsum("sxb,sxa,abcd,sxc,sxd->s", w, u, r4, u.conj(), w.conj(), optimize=True)
    return np.real(val)


def avg_fidelity_mc(rho_ab, samples: int = 10_000, seed=None, twirl: bool = True,
                    frame: PauliFrame | None = None) -> tuple[float, float]:
    """Monte-Carlo estimate of the Haar-averaged teleportation fidelity.

    Parameters
    ----------
    rho_ab : DensityMatrix or PureState
        Shared resource with ``d_A = d_B = d_R``.
    samples : int
        Number of Haar-random inputs (>= 100).
    seed : int or numpy.random.Generator
    twirl : bool
        Twirl the resource into isotropic form first.  Only the twirled
        protocol is guaranteed to reach ``(f d + 1)/(d + 1)``.

    Returns
    -------
    (mean, stderr)
    """
    if samples < 100:
        raise PreconditionError("need at least 100 samples")
    rho_ab = as_density(rho_ab)
    if len(rho_ab.dims) != 2 or rho_ab.dims[0] != rho_ab.dims[1]:
        raise PreconditionError(f"expected a two-qudit resource, got dims {rho_ab.dims}")
    d = rho_ab.dims[0]
    frame = frame or PauliFrame(d)
    if twirl:
        rho_ab = isotropic_twirl(rho_ab)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, d)) + 1j * rng.standard_normal((samples, d))
    psis = z / np.linalg.norm(z, axis=1, keepdims=True)
    fid = np.empty(samples)
    chunk = 4096
    for lo in range(0, samples, chunk):
        fid[lo:lo + chunk] = _fidelities(rho_ab.mat, psis[lo:lo + chunk], frame)
    return float(fid.mean()), float(fid.std(ddof=1) / math.sqrt(samples))


def depolarizing_parameter(rho_ab, frame: PauliFrame | None = None, probes: int = 6,
                           seed=0) -> tuple[float, float]:
    """Least-squares fit of ``out = p phi + (1 - p) 1/d`` over random inputs.

    Returns ``(p, max_residual)``.
    """
    rho_ab = as_density(rho_ab)
    d = rho_ab.dims[0]
    frame = frame or PauliFrame(d)
    rng = np.random.default_rng(seed)
    num = den = 0.0
    pairs = []
    for _ in range(probes):
        z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        phi = PureState.normalized(z)
        out = teleport(rho_ab, phi, frame).mat
        a = phi.dm().mat - np.eye(d) / d
        b = out - np.eye(d) / d
        num += np.real(np.vdot(a, b))
        den += np.real(np.vdot(a, a))
        pairs.append((a, b))
    p = num / den
    resid = max(float(np.max(np.abs(b - p * a))) for a, b in pairs)
    return float(p), resid
