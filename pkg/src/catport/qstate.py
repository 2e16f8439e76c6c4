"""Quantum states with an explicit tensor factorization.

Conventions
-----------
* A composite operator on factors with local dimensions ``dims`` is stored as
  a ``(D, D)`` array, ``D = prod(dims)``, in the usual Kronecker order (factor
  0 is the most significant index).
* ``keep`` / ``cut`` arguments are factor indices into ``dims``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import PreconditionError, get_settings
from .linalg import as_matrix, dagger, eigvalsh_desc, hermitian_defect, svd, trace_norm


def _dims_tuple(dims, total: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise PreconditionError(f"invalid local dimensions {dims}")
    if math.prod(dims) != total:
        raise PreconditionError(f"dims {dims} do not multiply to {total}")
    return dims


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Positive, unit-trace operator with declared local dimensions."""

    mat: np.ndarray
    dims: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        m = as_matrix(self.mat)
        if m.shape[0] != m.shape[1]:
            raise PreconditionError("density matrix must be square")
        dims = (m.shape[0],) if self.dims is None else self.dims
        object.__setattr__(self, "dims", _dims_tuple(dims, m.shape[0]))
        s = get_settings()
        if hermitian_defect(m) > s.tol_herm:
            raise PreconditionError(f"not Hermitian (defect {hermitian_defect(m):.2e})")
        m = 0.5 * (m + dagger(m))
        tr = np.trace(m).real
        if abs(tr - 1) > s.tol_trace:
            raise PreconditionError(f"trace {tr!r} != 1")
        lo = eigvalsh_desc(m)[-1]
        if lo < -s.tol_psd:
            raise PreconditionError(f"not positive semidefinite (min eigenvalue {lo:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues, descending, with roundoff negatives clamped to zero."""
        w = eigvalsh_desc(self.mat)
        if w[-1] < -get_settings().tol_psd:
            raise PreconditionError(f"invalid state: eigenvalue {w[-1]:.3e}")
        return np.clip(w, 0.0, None)

    def expect(self, op) -> float:
        return float(np.real(np.trace(np.asarray(op) @ self.mat)))

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims})"


@dataclass(frozen=True, eq=False)
class PureState:
    vec: np.ndarray
    dims: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=complex).ravel()
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise PreconditionError("state vector must be finite and non-empty")
        nrm = np.linalg.norm(v)
        if abs(nrm - 1) > get_settings().tol_norm * max(1, v.size):
            raise PreconditionError(f"state vector has norm {nrm!r}")
        dims = (v.size,) if self.dims is None else self.dims
        object.__setattr__(self, "dims", _dims_tuple(dims, v.size))
        v = v / nrm
        v.setflags(write=False)
        object.__setattr__(self, "vec", v)

    @classmethod
    def normalized(cls, vec, dims=None) -> "PureState":
        v = np.asarray(vec, dtype=complex).ravel()
        return cls(v / np.linalg.norm(v), dims)

    def dm(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.vec, self.vec.conj()), self.dims)

    def __repr__(self):
        return f"PureState(dims={self.dims})"


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Squared Schmidt coefficients, stored in descending order."""

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float).ravel()
        tol = 1e-10
        if lam.size == 0 or np.any(lam < -tol) or np.any(lam > 1 + tol):
            raise PreconditionError(f"invalid Schmidt spectrum {lam}")
        if abs(lam.sum() - 1) > tol:
            raise PreconditionError(f"Schmidt spectrum sums to {lam.sum()!r}")
        lam = np.sort(np.clip(lam, 0.0, 1.0))[::-1].copy()
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.lambdas, dtype=dtype)

    def __len__(self):
        return self.lambdas.size

    def padded(self, length: int) -> np.ndarray:
        if length < len(self):
            if np.any(self.lambdas[length:] > 1e-12):
                raise PreconditionError(f"spectrum has more than {length} nonzero entries")
            return self.lambdas[:length].copy()
        return np.concatenate([self.lambdas, np.zeros(length - len(self))])

    def entropy(self, base: float | None = None) -> float:
        return shannon_entropy(self.lambdas, base)


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, PureState):
        return state.dm()
    raise PreconditionError(f"expected DensityMatrix or PureState, got {type(state).__name__}")


# ---------------------------------------------------------------- factor maps


def ptrace(mat: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Partial trace on a raw operator; kept factors stay in ascending order."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise PreconditionError(f"factor index out of range in keep={keep} for {n} factors")
    t = np.asarray(mat).reshape(dims + dims)
    rows = list(range(n))
    cols = [i + n if i in keep else i for i in range(n)]
    out = keep + [k + n for k in keep]
    dk = math.prod(dims[k] for k in keep)
    return np.einsum(t, rows + cols, out).reshape(dk, dk)


def permute_factors(mat: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new factor ``j`` is old factor ``perm[j]``.

    Works on operators (2-d) and vectors (1-d).
    """
    dims = list(dims)
    perm = list(perm)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise PreconditionError(f"{perm} is not a permutation of {n} factors")
    a = np.asarray(mat)
    if a.ndim == 1:
        return a.reshape(dims).transpose(perm).reshape(-1)
    t = a.reshape(dims + dims).transpose(perm + [p + n for p in perm])
    return t.reshape(a.shape)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the factors listed in ``keep``."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise PreconditionError("keep must name at least one factor")
    red = ptrace(rho.mat, rho.dims, keep)
    return DensityMatrix(red, tuple(rho.dims[k] for k in keep))


def tensor(*states: DensityMatrix) -> DensityMatrix:
    from .linalg import kron_all

    return DensityMatrix(
        kron_all([s.mat for s in states]), tuple(d for s in states for d in s.dims)
    )


def schmidt(psi: PureState, cut: Iterable[int]) -> SchmidtSpectrum:
    """Schmidt spectrum of ``psi`` across ``cut`` : complement.

    Parameters
    ----------
    psi : PureState
    cut : iterable of int
        Factor indices forming the first party.
    """
    cut = sorted(set(int(c) for c in cut))
    n = len(psi.dims)
    if not cut or len(cut) == n or any(c < 0 or c >= n for c in cut):
        raise PreconditionError(f"invalid bipartition {cut} of {n} factors")
    rest = [i for i in range(n) if i not in cut]
    v = permute_factors(psi.vec, psi.dims, cut + rest)
    da = math.prod(psi.dims[i] for i in cut)
    _, s, _ = svd(v.reshape(da, -1))
    lam = s**2
    return SchmidtSpectrum(lam / lam.sum())


# ---------------------------------------------------------------- functionals


def shannon_entropy(p, base: float | None = None) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    h = float(-np.sum(p * np.log(p)))
    base = get_settings().entropy_base if base is None else base
    return h / math.log(base) if base else h


def von_neumann_entropy(rho: DensityMatrix, base: float | None = None) -> float:
    """``-tr rho log rho`` (natural log unless ``base`` or the settings say otherwise)."""
    return shannon_entropy(rho.eigenvalues(), base)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of ``a - b``."""
    if a.dims != b.dims:
        raise PreconditionError(f"dimension mismatch {a.dims} vs {b.dims}")
    return 0.5 * trace_norm(a.mat - b.mat)


# ---------------------------------------------------------------- sampling


def haar_random_pure(d: int, seed=None) -> PureState:
    """Haar-random pure state from a normalized complex Gaussian vector.

    ``seed`` may be an int or a ``numpy.random.Generator`` owned by the caller.
    """
    if d < 1:
        raise PreconditionError("dimension must be >= 1")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState.normalized(v)


def haar_random_unitary(d: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density_matrix(dims: Sequence[int], seed=None, rank: int | None = None) -> DensityMatrix:
    """Random mixed state from the Ginibre ensemble (Hilbert-Schmidt measure)."""
    rng = np.random.default_rng(seed)
    d = math.prod(dims)
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    m = g @ dagger(g)
    return DensityMatrix(m / np.trace(m).real, tuple(dims))


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    d = math.prod(dims)
    return DensityMatrix(np.eye(d) / d, tuple(dims))


def basis_state(index: Sequence[int], dims: Sequence[int]) -> PureState:
    v = np.zeros(math.prod(dims), dtype=complex)
    v[np.ravel_multi_index(tuple(index), tuple(dims))] = 1
    return PureState(v, tuple(dims))
