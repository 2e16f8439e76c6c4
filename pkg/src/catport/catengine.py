"""Duan-type catalysts and the catalytic entanglement-fraction subroutine.

Layout
------
Every multi-copy object lives on ``n`` *pairs* ``(A_1 B_1) ... (A_n B_n)``
stored pair-major, i.e. with factor dimensions ``[d_A, d_B] * n``.  At the
pair level the same matrix is an operator on ``[d] * n`` with
``d = d_A * d_B``; all register permutations below act at that level.

The catalyst carries a classical register ``M`` with values ``1..n``.  Since
``M`` is classical the joint state is block diagonal in ``M`` and is stored as
``n`` separate blocks; the full ``n * d**n`` matrix is never formed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .config import PreconditionError, get_settings
from .entmetrics import max_entangled
from .linalg import check_dim, dagger, is_unitary, kron, kron_all, kron_power, trace_norm
from .qstate import (
    DensityMatrix,
    haar_random_unitary,
    permute_factors,
    ptrace,
)

CHANNEL_KINDS = ("identity", "local-unitary", "one-way-locc", "permutation")


def _pair_major_perm(n: int) -> list[int]:
    # [A_1..A_n, B_1..B_n] -> [A_1, B_1, ..., A_n, B_n]
    return [k for i in range(n) for k in (i, n + i)]


@dataclass(frozen=True, eq=False)
class MultiCopyChannel:
    """One-way LOCC instrument on ``n`` copies of a bipartite system.

    Branch ``k`` applies ``alice[k]`` to ``A_1..A_n`` and the unitary
    ``bob[k]`` to ``B_1..B_n``; ``sum_k alice[k]^dag alice[k] = 1``.  All
    supported kinds (identity, local unitaries, copy permutations) are
    special cases with one or more branches.  A single-party system is the
    case ``local_dims = (d, 1)``.
    """

    kind: str
    n: int
    local_dims: tuple[int, int]
    alice: tuple[np.ndarray, ...]
    bob: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise PreconditionError(f"unknown channel kind {self.kind!r}")
        da, db = (int(x) for x in self.local_dims)
        object.__setattr__(self, "local_dims", (da, db))
        if self.n < 1:
            raise PreconditionError("channel must act on at least one copy")
        check_dim((da * db) ** self.n, "multi-copy channel")
        alice = tuple(np.asarray(a, dtype=complex) for a in self.alice)
        bob = tuple(np.asarray(b, dtype=complex) for b in self.bob)
        if not alice or len(alice) != len(bob):
            raise PreconditionError("need one Bob unitary per Alice measurement operator")
        dA, dB = da**self.n, db**self.n
        for a, b in zip(alice, bob):
            if a.shape != (dA, dA) or b.shape != (dB, dB):
                raise PreconditionError(
                    f"branch shapes {a.shape}, {b.shape} do not match ({dA}, {dB})"
                )
            if not is_unitary(b):
                raise PreconditionError("Bob's correction operators must be unitary")
        completeness = sum(dagger(a) @ a for a in alice)
        defect = float(np.max(np.abs(completeness - np.eye(dA))))
        if defect > get_settings().tol_kraus:
            raise PreconditionError(f"measurement is not complete (defect {defect:.2e})")
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)

    @property
    def pair_dim(self) -> int:
        return self.local_dims[0] * self.local_dims[1]

    @property
    def dim(self) -> int:
        return self.pair_dim**self.n

    @cached_property
    def kraus(self) -> tuple[np.ndarray, ...]:
        """Kraus operators in pair-major ordering."""
        da, db = self.local_dims
        dims = [da] * self.n + [db] * self.n
        perm = _pair_major_perm(self.n)
        return tuple(permute_factors(np.kron(a, b), dims, perm) for a, b in zip(self.alice, self.bob))

    @property
    def branches(self) -> int:
        return len(self.alice)

    def apply(self, mat: np.ndarray) -> np.ndarray:
        mat = np.asarray(mat)
        if mat.shape != (self.dim, self.dim):
            raise PreconditionError(f"channel acts on dimension {self.dim}, got {mat.shape}")
        out = np.zeros_like(mat, dtype=complex)
        for k in self.kraus:
            out += k @ mat @ dagger(k)
        return out


def identity_channel(n: int, local_dims: Sequence[int]) -> MultiCopyChannel:
    da, db = local_dims
    return MultiCopyChannel("identity", n, (da, db), (np.eye(da**n),), (np.eye(db**n),))


def local_unitary_channel(ua, ub, n: int, local_dims: Sequence[int]) -> MultiCopyChannel:
    """``ua`` on all of Alice's copies, ``ub`` on all of Bob's."""
    if not is_unitary(np.asarray(ua)):
        raise PreconditionError("Alice's operator must be unitary")
    return MultiCopyChannel("local-unitary", n, tuple(local_dims), (ua,), (ub,))


def copywise_unitary_channel(alice_units, bob_units) -> MultiCopyChannel:
    """Independent local unitaries per copy: ``(x)_i (ua_i (x) ub_i)``."""
    if len(alice_units) != len(bob_units):
        raise PreconditionError("need the same number of Alice and Bob unitaries")
    n = len(alice_units)
    dims = (np.shape(alice_units[0])[0], np.shape(bob_units[0])[0])
    return local_unitary_channel(kron_all(list(alice_units)), kron_all(list(bob_units)), n, dims)


def permutation_channel(perm: Sequence[int], local_dims: Sequence[int]) -> MultiCopyChannel:
    """Relabel copies so that new copy ``j`` is old copy ``perm[j]``."""
    n = len(perm)
    da, db = local_dims

    def perm_matrix(d):
        eye = np.eye(d**n)
        return np.stack([permute_factors(col, [d] * n, perm) for col in eye.T], axis=1)

    return MultiCopyChannel("permutation", n, (da, db), (perm_matrix(da),), (perm_matrix(db),))


def one_way_locc(alice_ops, bob_units, n: int, local_dims: Sequence[int]) -> MultiCopyChannel:
    return MultiCopyChannel("one-way-locc", n, tuple(local_dims), tuple(alice_ops), tuple(bob_units))


def tensor_power_channel(single: MultiCopyChannel, n: int) -> MultiCopyChannel:
    """``E_1^{(x) n}`` for a single-copy channel ``E_1``."""
    if single.n != 1:
        raise PreconditionError("tensor_power_channel expects a single-copy channel")
    import itertools

    idx = list(itertools.product(range(single.branches), repeat=n))
    check_dim(single.branches**n, "branch count")
    alice = [kron_all([single.alice[i] for i in t]) for t in idx]
    bob = [kron_all([single.bob[i] for i in t]) for t in idx]
    kind = single.kind if single.branches == 1 else "one-way-locc"
    return MultiCopyChannel(kind, n, single.local_dims, tuple(alice), tuple(bob))


def random_locc_channel(n: int, local_dims: Sequence[int], outcomes: int = 3, seed=None) -> MultiCopyChannel:
    """Random one-way LOCC instrument: an isometry split into Alice's
    measurement operators, plus a Haar-random Bob unitary per outcome."""
    rng = np.random.default_rng(seed)
    da, db = local_dims
    dA, dB = da**n, db**n
    g = rng.standard_normal((outcomes * dA, dA)) + 1j * rng.standard_normal((outcomes * dA, dA))
    iso, _ = np.linalg.qr(g)
    alice = [iso[k * dA:(k + 1) * dA, :] for k in range(outcomes)]
    bob = [haar_random_unitary(dB, rng) for _ in range(outcomes)]
    return one_way_locc(alice, bob, n, (da, db))


# ---------------------------------------------------------------- catalyst


@dataclass(frozen=True, eq=False)
class BlockCatalystState:
    """``omega = (1/n) sum_i block_i (x) |i><i|_M`` over registers ``2..n``.

    ``layout="suffix"``: ``block_i = rho^{(x) i-1} (x) tr_{1..i} sigma_n``.
    ``layout="prefix"``: ``block_i = rho^{(x) i-1} (x) tr_{n-i+1..n} sigma_n``
    (marginal on the *first* ``n - i`` copies), the ordering that makes a
    uniform cyclic register shift restore the catalyst.
    """

    n: int
    local_dims: tuple[int, int]
    blocks: tuple[DensityMatrix, ...]
    sigma_n: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    channel: MultiCopyChannel = field(repr=False)
    layout: str = "suffix"

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, 1 / self.n)

    @property
    def pair_dim(self) -> int:
        return self.local_dims[0] * self.local_dims[1]


def _marginal(sigma_n: np.ndarray, d: int, n: int, copies: Sequence[int]) -> np.ndarray:
    copies = list(copies)
    if not copies:
        return np.ones((1, 1), dtype=complex)
    return ptrace(sigma_n, [d] * n, copies)


def build_catalyst(rho: DensityMatrix, E: MultiCopyChannel, n: int | None = None,
                   layout: str = "suffix") -> BlockCatalystState:
    """Construct the Duan-type catalyst for ``(rho, E, n)``.

    ``sigma_n = E(rho^{(x) n})`` is computed once and cached on the result.
    """
    n = E.n if n is None else n
    if n != E.n:
        raise PreconditionError(f"channel acts on {E.n} copies, not {n}")
    if n < 2:
        raise PreconditionError("catalyst needs n >= 2")
    if layout not in ("suffix", "prefix"):
        raise PreconditionError(f"unknown layout {layout!r}")
    d = E.pair_dim
    if rho.dim != d:
        raise PreconditionError(f"state dimension {rho.dim} does not match channel pair dimension {d}")
    check_dim(d**n, "catalyst construction")
    sigma_n = E.apply(kron_power(rho.mat, n))
    blocks = []
    for i in range(1, n + 1):
        if layout == "suffix":
            tail = _marginal(sigma_n, d, n, range(i, n))
        else:
            tail = _marginal(sigma_n, d, n, range(0, n - i))
        blk = kron(kron_power(rho.mat, i - 1), tail)
        blocks.append(DensityMatrix(blk, (d,) * (n - 1)))
    return BlockCatalystState(n, E.local_dims, tuple(blocks), sigma_n, rho.mat, E, layout)


def catalyst_matrix(cat: BlockCatalystState) -> np.ndarray:
    """Dense ``omega`` with ``M`` as the last factor (small cases only)."""
    dim = cat.blocks[0].dim
    check_dim(dim * cat.n, "dense catalyst")
    out = np.zeros((dim * cat.n, dim * cat.n), dtype=complex)
    for i, blk in enumerate(cat.blocks):
        proj = np.zeros((cat.n, cat.n))
        proj[i, i] = 1 / cat.n
        out += np.kron(blk.mat, proj)
    return out


# ---------------------------------------------------------------- subroutine


@dataclass(eq=False)
class ProtocolReport:
    """Outcome of one catalytic run.

    Norm conventions: ``catalyst_drift`` and ``joint_correlation`` are trace
    distances (half the trace norm); ``epsilon_iid`` is the full trace norm
    ``||sigma_n - sigma^{(x) n}||_1``.
    """

    system_out: DensityMatrix
    catalyst_drift: float
    joint_correlation: float | None
    epsilon_iid: float | None
    bound_3eps_satisfied: bool | None
    n: int
    catalyst_after: tuple[DensityMatrix, ...] = field(default=(), repr=False)
    joint_blocks: tuple[np.ndarray, ...] | None = field(default=None, repr=False)
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        from .entmetrics import singlet_fraction

        d = {
            "n": self.n,
            "system_dims": list(self.system_out.dims),
            "system_out": {
                "real": np.real(self.system_out.mat).tolist(),
                "imag": np.imag(self.system_out.mat).tolist(),
            },
            "catalyst_drift": float(self.catalyst_drift),
            "joint_correlation": None if self.joint_correlation is None else float(self.joint_correlation),
            "epsilon_iid": None if self.epsilon_iid is None else float(self.epsilon_iid),
            "bound_3eps_satisfied": self.bound_3eps_satisfied,
        }
        dims = self.system_out.dims
        if len(dims) == 2 and dims[0] == dims[1]:
            d["singlet_fraction"] = singlet_fraction(self.system_out)
        d.update(self.extras)
        return d


def cycle_register(blocks: Sequence) -> list:
    """Relabel ``|i>_M -> |i+1>_M`` and ``|n>_M -> |1>_M``."""
    blocks = list(blocks)
    return [blocks[-1]] + blocks[:-1]


def swap_pairs(mat: np.ndarray, d: int, n: int, i: int, j: int) -> np.ndarray:
    """Exchange pair registers ``i`` and ``j`` (0-based)."""
    perm = list(range(n))
    perm[i], perm[j] = perm[j], perm[i]
    return permute_factors(mat, [d] * n, perm)


def shift_pairs(mat: np.ndarray, d: int, n: int) -> np.ndarray:
    """Cyclic relabel ``C_1 -> C_2 -> ... -> C_n -> C_1``."""
    perm = [n - 1] + list(range(n - 1))
    return permute_factors(mat, [d] * n, perm)


def run_subroutine(rho: DensityMatrix, cat: BlockCatalystState, E: MultiCopyChannel,
                   retain_joint: bool = True) -> ProtocolReport:
    """Execute the catalytic subroutine step by step.

    1. apply ``E`` to all ``n`` pairs in the ``M = n`` branch only;
    2. relabel ``M`` cyclically;
    3. permute pair registers conditioned on ``M`` (swap pair 1 with pair
       ``M`` for the suffix layout, uniform cyclic shift for the prefix one);
    4. discard the catalyst.

    With ``retain_joint`` the system-catalyst correlation and the
    ``3 epsilon`` bound are evaluated before the joint blocks are dropped.
    """
    n, d = cat.n, cat.pair_dim
    if E is not cat.channel:
        same = (E.n == cat.channel.n and E.branches == cat.channel.branches and all(
            np.allclose(a, b) for a, b in zip(E.kraus, cat.channel.kraus)))
        if not same:
            raise PreconditionError("catalyst was built for a different channel")
    if rho.mat.shape != cat.rho.shape or not np.allclose(rho.mat, cat.rho, atol=1e-12):
        raise PreconditionError("catalyst was built for a different input state")

    joint = [kron(rho.mat, blk.mat) for blk in cat.blocks]
    # step 1: controlled on M == n
    joint[n - 1] = E.apply(joint[n - 1])
    # step 2
    joint = cycle_register(joint)
    # step 3
    if cat.layout == "suffix":
        joint = [swap_pairs(blk, d, n, 0, i) for i, blk in enumerate(joint)]
    else:
        joint = [shift_pairs(blk, d, n) for blk in joint]
    # step 4
    system = sum(ptrace(blk, [d] * n, [0]) for blk in joint) / n
    system_out = DensityMatrix(system, rho.dims)
    after = tuple(DensityMatrix(ptrace(blk, [d] * n, range(1, n)), (d,) * (n - 1)) for blk in joint)
    drift = sum(0.5 * trace_norm(a.mat - b.mat) for a, b in zip(after, cat.blocks)) / n

    corr = eps = ok = None
    if retain_joint:
        corr = sum(
            0.5 * trace_norm(blk - np.kron(system, c.mat)) for blk, c in zip(joint, cat.blocks)
        ) / n
        eps = trace_norm(cat.sigma_n - kron_power(system, n))
        ok = bool(2 * corr <= 3 * eps + get_settings().bound_slack)
    return ProtocolReport(
        system_out=system_out,
        catalyst_drift=float(drift),
        joint_correlation=None if corr is None else float(corr),
        epsilon_iid=None if eps is None else float(eps),
        bound_3eps_satisfied=ok,
        n=n,
        catalyst_after=after,
        joint_blocks=tuple(joint) if retain_joint else None,
    )


def correlation_check(report: ProtocolReport) -> bool:
    """``||joint - system (x) omega||_1 <= 3 ||sigma_n - sigma^{(x) n}||_1``.

    Both sides in the unnormalized trace norm; the report stores the left
    side as a trace distance, hence the factor 2.
    """
    if report.joint_correlation is None or report.epsilon_iid is None:
        raise PreconditionError("report was produced without retained joint-state data")
    return bool(2 * report.joint_correlation <= 3 * report.epsilon_iid + get_settings().bound_slack)


def multi_copy_fraction(rho: DensityMatrix, E: MultiCopyChannel) -> float:
    """Per-copy value ``(1/n) sum_i <phi+| tr_{/i} E(rho^{(x) n}) |phi+>``.

    For a fixed candidate channel this is a lower bound on ``f_n / n``.
    """
    da, db = E.local_dims
    if da != db:
        raise PreconditionError("entanglement fraction needs equal local dimensions")
    n, d = E.n, E.pair_dim
    sigma_n = E.apply(kron_power(rho.mat, n))
    v = max_entangled(da).vec
    total = sum(np.real(v.conj() @ ptrace(sigma_n, [d] * n, [i]) @ v) for i in range(n))
    return float(total / n)


def pair_dims_of(rho: DensityMatrix) -> tuple[int, int]:
    if len(rho.dims) == 2:
        return rho.dims
    if len(rho.dims) == 1:
        return (rho.dims[0], 1)
    raise PreconditionError(f"cannot read a single-copy pair from dims {rho.dims}")


def catalyst_dimension(cat: BlockCatalystState) -> int:
    return cat.pair_dim ** (cat.n - 1) * cat.n


__all__ = [
    "MultiCopyChannel",
    "BlockCatalystState",
    "ProtocolReport",
    "identity_channel",
    "local_unitary_channel",
    "copywise_unitary_channel",
    "permutation_channel",
    "one_way_locc",
    "tensor_power_channel",
    "random_locc_channel",
    "build_catalyst",
    "catalyst_matrix",
    "run_subroutine",
    "correlation_check",
    "multi_copy_fraction",
    "cycle_register",
    "swap_pairs",
    "shift_pairs",
    "pair_dims_of",
    "catalyst_dimension",
]

