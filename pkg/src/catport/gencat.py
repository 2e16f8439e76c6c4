"""Catalytic expectation-value optimization and work extraction.

For an observable ``O`` and a channel ``E`` on ``n`` copies, a catalyst lets
a single copy reach the per-copy value ``(1/n) tr[E(rho^{(x) n}) O_tot]``
with ``O_tot = sum_i 1_{/i} (x) O_i``.  With ``O = H`` and ``E`` ranging over
unitaries this is collective work extraction: the per-copy minimum is
found exactly by pairing the spectrum of ``rho^{(x) n}`` in descending order
with the total energies in ascending order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .catengine import MultiCopyChannel, build_catalyst, run_subroutine
from .config import BoundaryError, NumericError, PreconditionError
from .linalg import bisect_root, check_dim, dagger, eig_hermitian, hermitian_defect
from .qstate import DensityMatrix, as_density, shannon_entropy, von_neumann_entropy


@dataclass(frozen=True, eq=False)
class Observable:
    mat: np.ndarray
    role: str = "observable"

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise PreconditionError("observable must be a square matrix")
        if hermitian_defect(m) > 1e-10:
            raise PreconditionError(f"observable is not Hermitian (defect {hermitian_defect(m):.2e})")
        m = 0.5 * (m + dagger(m))
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def energies(self) -> np.ndarray:
        """Eigenvalues, ascending."""
        return eig_hermitian(self.mat)[0][::-1]


def _as_observable(H, role="hamiltonian") -> Observable:
    return H if isinstance(H, Observable) else Observable(H, role)


def _check(rho: DensityMatrix, H: Observable):
    if rho.dim != H.dim:
        raise PreconditionError(f"state dimension {rho.dim} != observable dimension {H.dim}")


def total_energy(H, n: int) -> np.ndarray:
    """``sum_i 1_{/i} (x) H_i`` on ``n`` copies."""
    H = _as_observable(H)
    d = H.dim
    check_dim(d**n, "total energy operator")
    out = np.zeros((d**n, d**n), dtype=complex)
    for i in range(n):
        out += np.kron(np.kron(np.eye(d**i), H.mat), np.eye(d ** (n - i - 1)))
    return out


def _power_spectrum(values: np.ndarray, n: int, op) -> np.ndarray:
    out = values
    for _ in range(n - 1):
        out = op.outer(out, values).ravel()
    return out


def passive_energy(rho, H, n: int = 1) -> float:
    """Minimum of ``tr[H_tot U rho^{(x) n} U^dag]`` over unitaries ``U``."""
    rho = as_density(rho)
    H = _as_observable(H)
    _check(rho, H)
    if n < 1:
        raise PreconditionError("n must be >= 1")
    check_dim(rho.dim**n, "collective work extraction")
    w = np.sort(_power_spectrum(rho.eigenvalues(), n, np.multiply))[::-1]
    e = np.sort(_power_spectrum(H.energies(), n, np.add))
    return float(w @ e)


def ergotropy(rho, H) -> float:
    """``tr[H rho]`` minus the energy of the passive rearrangement of ``rho``."""
    return collective_ergotropy(rho, H, 1)


def collective_ergotropy(rho, H, n: int) -> float:
    """Per-copy ergotropy of ``rho^{(x) n}`` under the total Hamiltonian.

    Raises
    ------
    DimensionLimitError
        If ``d**n`` exceeds the configured cap.
    """
    rho = as_density(rho)
    H = _as_observable(H)
    _check(rho, H)
    return rho.expect(H.mat) - passive_energy(rho, H, n) / n


def sorting_unitary(rho, H, n: int = 1) -> np.ndarray:
    """Unitary on ``n`` copies that maps ``rho^{(x) n}`` onto its passive state.

    Eigenvectors of ``rho^{(x) n}`` in descending weight are sent to energy
    eigenvectors in ascending energy; ties are broken by index (stable sort).
    """
    rho = as_density(rho)
    H = _as_observable(H)
    _check(rho, H)
    check_dim(rho.dim**n, "sorting unitary")
    w, v = eig_hermitian(rho.mat)
    e, u = eig_hermitian(H.mat)
    vs, us = v, u
    ws, es = w, e
    for _ in range(n - 1):
        vs = np.kron(vs, v)
        ws = np.multiply.outer(ws, w).ravel()
        us = np.kron(us, u)
        es = np.add.outer(es, e).ravel()
    src = vs[:, np.argsort(-ws, kind="stable")]
    dst = us[:, np.argsort(es, kind="stable")]
    return dst @ dagger(src)


def unitary_channel(U, n: int, d: int) -> MultiCopyChannel:
    """Single-party unitary on ``n`` copies (Bob is a trivial factor)."""
    return MultiCopyChannel("local-unitary", n, (d, 1), (np.asarray(U),), (np.eye(1),))


def catalytic_expectation(rho, O, E: MultiCopyChannel, n: int | None = None,
                          layout: str = "prefix") -> tuple[float, float]:
    """Per-copy expectation reached by one catalytic run.

    Builds the catalyst for ``(rho, E)``, runs the conditional protocol and
    returns ``(tr[O system_out], catalyst_drift)``.
    """
    rho = as_density(rho)
    O = _as_observable(O)
    _check(rho, O)
    n = E.n if n is None else n
    cat = build_catalyst(rho, E, n, layout=layout)
    report = run_subroutine(rho, cat, E, retain_joint=False)
    return report.system_out.expect(O.mat), report.catalyst_drift


# ---------------------------------------------------------------- Gibbs


def gibbs_state(H, beta: float) -> DensityMatrix:
    H = _as_observable(H)
    e, u = eig_hermitian(H.mat)
    z = np.exp(-beta * (e - e.min()))
    p = z / z.sum()
    return DensityMatrix((u * p) @ dagger(u))


def entropy_matched_gibbs(rho, H, max_iter: int = 10_000) -> tuple[DensityMatrix, float]:
    """Gibbs state of ``H`` with the entropy of ``rho``, at ``beta >= 0``.

    The entropy of the Gibbs state falls monotonically from ``log d`` as
    ``beta`` grows from 0, so the root is bracketed on ``[0, hi]`` with
    ``hi`` widened until the bracket holds.

    Raises
    ------
    BoundaryError
        ``rho`` pure (``limit = +inf``).
    PreconditionError
        ``H`` proportional to the identity while ``rho`` is not maximally mixed.
    """
    rho = as_density(rho)
    H = _as_observable(H)
    _check(rho, H)
    d = rho.dim
    s0 = von_neumann_entropy(rho, math.e)
    if s0 >= math.log(d) - 1e-12:
        return DensityMatrix(np.eye(d) / d), 0.0
    if s0 <= 1e-12:
        raise BoundaryError("pure state: the matched Gibbs state needs beta -> +inf", math.inf)
    e = H.energies()
    spread = e[-1] - e[0]
    if spread <= 1e-14:
        raise PreconditionError("trivial Hamiltonian: every Gibbs state is maximally mixed")
    e = e - e[0]
    # entropy of the ground space is the beta -> inf limit
    g = int(np.sum(e <= 1e-12 * spread))
    if s0 <= math.log(g) + 1e-12:
        raise BoundaryError("entropy at or below the ground-space limit", math.inf)

    def gap(beta):
        z = np.exp(-beta * e)
        return shannon_entropy(z / z.sum(), math.e) - s0

    hi = 50 / spread
    widen = 0
    while gap(hi) > 0:
        hi *= 2
        widen += 1
        if widen > 60:
            raise NumericError("could not bracket the entropy-matched temperature")
    beta, _ = bisect_root(gap, 0.0, hi, tol=1e-15, max_iter=max_iter)
    return gibbs_state(H, beta), float(beta)


# ---------------------------------------------------------------- report


@dataclass
class WorkReport:
    """Work-extraction summary for ``n = 1 .. n_max``.

    ``per_copy_collective[n]`` is the per-copy ergotropy of ``rho^{(x) n}``
    and ``per_copy_energy[n]`` the matching minimal per-copy energy
    (``tr[H rho]`` minus the former).
    """

    single_copy: float
    per_copy_collective: dict[int, float]
    per_copy_energy: dict[int, float]
    gibbs_beta: float
    free_energy_gap: float
    energy: float = 0.0
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "single_copy": self.single_copy,
            "per_copy_collective": {str(k): v for k, v in sorted(self.per_copy_collective.items())},
            "per_copy_energy": {str(k): v for k, v in sorted(self.per_copy_energy.items())},
            "gibbs_beta": self.gibbs_beta,
            "free_energy_gap": self.free_energy_gap,
            "energy": self.energy,
        }
        out.update(self.extras)
        return out


def work_report(rho, H, n_max: int = 3) -> WorkReport:
    rho = as_density(rho)
    H = _as_observable(H)
    _check(rho, H)
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    energy = rho.expect(H.mat)
    coll = {n: collective_ergotropy(rho, H, n) for n in range(1, n_max + 1)}
    tau, beta = entropy_matched_gibbs(rho, H)
    return WorkReport(
        single_copy=coll[1],
        per_copy_collective=coll,
        per_copy_energy={n: energy - w for n, w in coll.items()},
        gibbs_beta=beta,
        free_energy_gap=energy - tau.expect(H.mat),
        energy=energy,
    )


__all__ = [
    "Observable",
    "WorkReport",
    "total_energy",
    "passive_energy",
    "ergotropy",
    "collective_ergotropy",
    "sorting_unitary",
    "unitary_channel",
    "catalytic_expectation",
    "gibbs_state",
    "entropy_matched_gibbs",
    "work_report",
]
