"""Entanglement fraction, teleportation fidelity and majorization."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import PreconditionError, get_settings
from .qstate import DensityMatrix, PureState, SchmidtSpectrum


def max_entangled(d: int, levels: int | None = None) -> PureState:
    """``sum_i |ii> / sqrt(levels)`` for ``i < levels`` inside ``C^d (x) C^d``.

    ``levels=None`` gives the maximally entangled state of two qudits.
    """
    levels = d if levels is None else levels
    if not 1 <= levels <= d:
        raise PreconditionError(f"levels must be in [1, {d}]")
    v = np.zeros(d * d, dtype=complex)
    v[[i * d + i for i in range(levels)]] = 1 / math.sqrt(levels)
    return PureState(v, (d, d))


def max_entangled_projector(d: int) -> np.ndarray:
    v = max_entangled(d).vec
    return np.outer(v, v.conj())


def _bipartite_dim(rho: DensityMatrix) -> int:
    if len(rho.dims) != 2:
        raise PreconditionError(f"expected a bipartite state, got dims {rho.dims}")
    da, db = rho.dims
    if da != db:
        raise PreconditionError(f"unequal local dimensions {da} != {db}")
    return da


def singlet_fraction(rho: DensityMatrix) -> float:
    """Overlap ``<phi+|rho|phi+>`` with the canonical maximally entangled state.

    No optimization over local operations is performed, so the value is a
    lower bound on the LOCC-optimized entanglement fraction.
    """
    d = _bipartite_dim(rho)
    v = max_entangled(d).vec
    return float(np.real(v.conj() @ rho.mat @ v))


def pure_ent_fraction(lam, d: int) -> float:
    """Entanglement fraction ``(sum_i sqrt(lambda_i))^2 / d`` of a pure state."""
    lam = np.asarray(lam, dtype=float)
    if lam.size > d and np.any(lam[d:] > 1e-12):
        raise PreconditionError(f"spectrum longer than d={d}")
    return float(np.sum(np.sqrt(np.clip(lam[:d], 0, None))) ** 2 / d)


def tele_fidelity(f: float, d_r: int) -> float:
    """Average teleportation fidelity ``(f d_R + 1) / (d_R + 1)``."""
    if not -1e-12 <= f <= 1 + 1e-12:
        raise PreconditionError(f"entanglement fraction {f} outside [0, 1]")
    return (f * d_r + 1) / (d_r + 1)


def classical_threshold(d_r: int) -> float:
    if d_r < 2:
        raise PreconditionError("d_R must be >= 2")
    return 2 / (d_r + 1)


@dataclass(frozen=True)
class FidelityRecord:
    singlet_fraction: float
    tele_fidelity: float
    d_r: int

    @classmethod
    def from_fraction(cls, f: float, d_r: int) -> "FidelityRecord":
        return cls(f, tele_fidelity(f, d_r), d_r)


def isotropic_twirl(rho: DensityMatrix) -> DensityMatrix:
    """Project onto the ``U (x) U*``-invariant (isotropic) family.

    The result is ``f phi+ + (1 - f) (1 - phi+) / (d^2 - 1)`` with ``f`` the
    singlet fraction of ``rho``.
    """
    d = _bipartite_dim(rho)
    f = singlet_fraction(rho)
    p = max_entangled_projector(d)
    if d == 1:
        return DensityMatrix(p, rho.dims)
    out = f * p + (1 - f) * (np.eye(d * d) - p) / (d * d - 1)
    return DensityMatrix(out, rho.dims)


def majorizes(mu, lam) -> bool:
    """True iff ``mu`` majorizes ``lam`` (sorted partial sums of ``mu`` dominate)."""
    mu = np.sort(np.asarray(mu, dtype=float).ravel())[::-1]
    lam = np.sort(np.asarray(lam, dtype=float).ravel())[::-1]
    k = max(mu.size, lam.size)
    mu = np.pad(mu, (0, k - mu.size))
    lam = np.pad(lam, (0, k - lam.size))
    slack = get_settings().tol_majorization
    if abs(mu.sum() - lam.sum()) > 1e-10:
        return False
    return bool(np.all(np.cumsum(mu) >= np.cumsum(lam) - slack))


def schmidt_spectrum_of(lam) -> SchmidtSpectrum:
    return lam if isinstance(lam, SchmidtSpectrum) else SchmidtSpectrum(lam)
