"""Dense complex linear algebra kernel.

Matrices are plain ``numpy`` complex arrays.  The heavy lifting (Hermitian
eigensolver, SVD) is delegated to LAPACK through ``numpy.linalg``; this module
adds the contracts the rest of the package relies on: descending ordering,
Hermiticity checks and the total-dimension cap.
"""
from __future__ import annotations

from functools import reduce
from typing import Callable, Sequence

import numpy as np

from .config import DimensionLimitError, NumericError, PreconditionError, get_settings


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise PreconditionError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise PreconditionError("matrix has non-finite entries")
    return m


def check_dim(total: int, what: str = "operator") -> None:
    cap = get_settings().max_dim
    if total > cap:
        raise DimensionLimitError(
            f"{what} would have dimension {total} > cap {cap}; "
            "reduce the copy number n or raise max_dim"
        )


def kron(a, b) -> np.ndarray:
    """Kronecker product with the dimension cap enforced."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    check_dim(a.shape[0] * b.shape[0], "kron product")
    if a.ndim == 2 and b.ndim == 2:
        check_dim(a.shape[1] * b.shape[1], "kron product")
    return np.kron(a, b)


def kron_all(mats: Sequence) -> np.ndarray:
    if not mats:
        return np.ones((1, 1), dtype=complex)
    return reduce(kron, mats)


def kron_power(a, n: int) -> np.ndarray:
    return kron_all([a] * n)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def hermitian_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def is_unitary(u: np.ndarray, tol: float | None = None) -> bool:
    tol = get_settings().tol_unitary if tol is None else tol
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= tol)


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, v)`` with ``a == v @ diag(w) @ v.conj().T``.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise PreconditionError("eig_hermitian needs a square matrix")
    if hermitian_defect(a) > get_settings().tol_herm:
        raise PreconditionError(
            f"matrix is not Hermitian (defect {hermitian_defect(a):.3e})"
        )
    try:
        w, v = np.linalg.eigh(0.5 * (a + dagger(a)))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Hermitian eigensolver did not converge: {exc}") from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def eigvalsh_desc(a: np.ndarray) -> np.ndarray:
    # unchecked fast path for internal use on matrices Hermitian by construction
    a = np.asarray(a)
    try:
        return np.linalg.eigvalsh(0.5 * (a + dagger(a)))[::-1]
    except np.linalg.LinAlgError as exc:
        raise NumericError(str(exc)) from exc


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD ``a = u @ diag(s) @ v.conj().T`` (rectangular ``diag``)."""
    a = as_matrix(a)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD did not converge: {exc}") from exc
    return u, s, dagger(vh)


def trace_norm(a: np.ndarray) -> float:
    """Schatten-1 norm of a Hermitian matrix."""
    return float(np.sum(np.abs(eigvalsh_desc(a))))


def bisect_root(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> tuple[float, int]:
    """Plain bisection.  Returns ``(root, iterations)``."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo, 0
    if fhi == 0:
        return hi, 0
    if np.sign(flo) == np.sign(fhi):
        raise NumericError(f"root not bracketed on [{lo}, {hi}]")
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0:
            return mid, it
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol:
            return 0.5 * (lo + hi), it
    raise NumericError(f"bisection did not reach {tol} in {max_iter} iterations")
