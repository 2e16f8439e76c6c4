"""Entropy-constrained lower bound on the regularized entanglement fraction
and the catalytic-advantage map over the qutrit Schmidt simplex.

For a pure state with Schmidt spectrum ``lam`` the bound is

    max (sum_i sqrt(lam'_i))^2 / d   subject to   S(lam') <= S(lam),

over probability vectors ``lam'`` of length ``d``.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import PreconditionError
from .entmetrics import pure_ent_fraction, tele_fidelity
from .linalg import bisect_root
from .qstate import SchmidtSpectrum, shannon_entropy

LOG2 = math.log(2)
_GOLDEN = (math.sqrt(5) - 1) / 2
CSV_HEADER = ["lambda1", "lambda2", "lambda3", "f_std", "f_cat_lb", "F_std", "F_cat_lb", "eta"]


def binary_entropy(x: float) -> float:
    return shannon_entropy([x, 1 - x], base=math.e)


def solve_binary_entropy_eq(tol: float = 1e-12) -> float:
    """Root of ``h(x) = x log 2`` in ``(1/2, 1)`` (about 0.7729)."""
    root, _ = bisect_root(lambda x: binary_entropy(x) - x * LOG2, 0.5, 0.999, tol=tol, max_iter=60)
    return root


# ---------------------------------------------------------------- optimizer


def _entropy_rows(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1)), 0.0)
    return t.sum(axis=-1)


def _objective_rows(p: np.ndarray, d: int) -> np.ndarray:
    return np.sqrt(np.clip(p, 0, None)).sum(axis=-1) ** 2 / d


def _ordered_grid(steps: int, d: int) -> np.ndarray:
    """All descending compositions of ``steps`` into ``d`` parts, scaled to 1."""
    rows = []

    def rec(prefix, remaining, cap, slots):
        if slots == 1:
            if remaining <= cap:
                rows.append(prefix + [remaining])
            return
        lo = -(-remaining // slots)
        for v in range(min(cap, remaining), lo - 1, -1):
            rec(prefix + [v], remaining - v, v, slots - 1)

    rec([], steps, steps, d)
    return np.asarray(rows, dtype=float) / steps


def _best_tail(t: float, s0: float) -> np.ndarray | None:
    """Most balanced ``(t, a, b)`` with ``a >= b`` and entropy <= s0, or None.

    For fixed leading entry the objective and the entropy both increase as
    the two tail entries are balanced, so the best feasible point is either
    the balanced tail or the one where the entropy constraint binds.
    """
    rest = 1 - t
    hi_a = min(t, rest)  # most unbalanced admissible tail
    if hi_a < rest / 2 - 1e-15:
        return None
    balanced = np.array([t, rest / 2, rest / 2])
    if shannon_entropy(balanced, math.e) <= s0:
        return balanced
    lopsided = np.array([t, hi_a, rest - hi_a])
    if shannon_entropy(lopsided, math.e) > s0:
        return None
    a, _ = bisect_root(
        lambda a: shannon_entropy([t, a, rest - a], math.e) - s0, rest / 2, hi_a, tol=1e-15, max_iter=200
    )
    return np.array([t, a, rest - a])


def _curve_value(t: float, s0: float) -> float:
    p = _best_tail(t, s0)
    return -np.inf if p is None else float(_objective_rows(p, 3))


def _golden_max(fn, lo: float, hi: float, tol: float = 1e-10) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    e = a + _GOLDEN * (b - a)
    fc, fe = fn(c), fn(e)
    while b - a > tol:
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, e, fe
            e = a + _GOLDEN * (b - a)
            fe = fn(e)
    return 0.5 * (a + b)


def _solve_qutrit(lam: np.ndarray, s0: float, coarse_step: float) -> np.ndarray:
    grid = _ordered_grid(int(round(1 / coarse_step)), 3)
    feasible = _entropy_rows(grid) <= s0 + 1e-15
    cands = grid[feasible]
    vals = _objective_rows(cands, 3)
    best = cands[np.argmax(vals)] if cands.size else lam
    # refine along the active-constraint curve, parametrized by the leading entry
    t0 = float(best[0])
    lo, hi = max(1 / 3, t0 - 2 * coarse_step), min(1.0, t0 + 2 * coarse_step)
    ts = np.linspace(lo, hi, 41)
    curve = [_curve_value(t, s0) for t in ts]
    k = int(np.argmax(curve))
    a, b = ts[max(k - 1, 0)], ts[min(k + 1, len(ts) - 1)]
    t_star = _golden_max(lambda t: _curve_value(t, s0), a, b)
    out = [p for p in (_best_tail(t_star, s0), _best_tail(ts[k], s0), best) if p is not None]
    return max(out, key=lambda p: _objective_rows(p, 3))


def _solve_general(lam: np.ndarray, s0: float, d: int, seed: int = 0) -> np.ndarray:
    from scipy.optimize import minimize

    rng = np.random.default_rng(seed)
    starts = [lam, np.full(d, 1 / d)] + list(rng.dirichlet(np.ones(d), size=8))
    cons = [
        {"type": "eq", "fun": lambda p: p.sum() - 1},
        {"type": "ineq", "fun": lambda p: s0 - shannon_entropy(np.clip(p, 0, None), math.e)},
    ]
    best = lam
    for x0 in starts:
        res = minimize(
            lambda p: -_objective_rows(np.clip(p, 0, None), d),
            x0,
            method="SLSQP",
            bounds=[(0, 1)] * d,
            constraints=cons,
            options={"ftol": 1e-12, "maxiter": 500},
        )
        p = np.clip(res.x, 0, None)
        p /= p.sum()
        if shannon_entropy(p, math.e) <= s0 + 1e-9 and _objective_rows(p, d) > _objective_rows(best, d):
            best = p
    return best


def lemma1_bound(lam, d: int, coarse_step: float = 0.01) -> tuple[float, SchmidtSpectrum]:
    """Entropy-constrained lower bound on the regularized entanglement fraction.

    Parameters
    ----------
    lam : array-like or SchmidtSpectrum
        Schmidt spectrum of the consumed pure state (padded to ``d``).
    d : int
        Local dimension, ``d >= 2``.
    coarse_step : float
        Resolution of the first-stage grid (qutrit case).

    Returns
    -------
    (f_cat_lb, lam_opt)
        The bound and a maximizing spectrum.  ``lam`` itself is always
        feasible, so ``f_cat_lb >= pure_ent_fraction(lam, d)``.
    """
    if d < 2:
        raise PreconditionError("d must be >= 2")
    lam = SchmidtSpectrum(lam).padded(d)
    s0 = shannon_entropy(lam, math.e)
    if s0 >= math.log(d) - 1e-14:
        u = np.full(d, 1 / d)
        return 1.0, SchmidtSpectrum(u)
    if d == 2:
        # the constraint fixes the larger coefficient from below; the objective
        # decreases in it, so lam itself is optimal
        best = lam
    elif d == 3:
        best = _solve_qutrit(lam, s0, coarse_step)
    else:
        best = _solve_general(lam, s0, d)
    if _objective_rows(best, d) < _objective_rows(lam, d):
        best = lam
    return float(_objective_rows(best, d)), SchmidtSpectrum(best / best.sum())


# ---------------------------------------------------------------- advantage map


@dataclass(frozen=True, eq=False)
class AdvantagePoint:
    lam: SchmidtSpectrum
    f_std: float
    f_cat_lb: float
    F_std: float
    F_cat_lb: float
    eta: float

    def row(self) -> list[float]:
        return list(self.lam.lambdas) + [self.f_std, self.f_cat_lb, self.F_std, self.F_cat_lb, self.eta]


def advantage_point(lam, d_r: int = 3) -> AdvantagePoint:
    """Catalytic advantage (a lower bound) for one pure state of two qudits of dimension ``d_r``."""
    spectrum = SchmidtSpectrum(SchmidtSpectrum(lam).padded(d_r))
    f_std = pure_ent_fraction(spectrum.lambdas, d_r)
    f_cat, _ = lemma1_bound(spectrum, d_r)
    F_std = tele_fidelity(min(f_std, 1.0), d_r)
    F_cat = tele_fidelity(min(f_cat, 1.0), d_r)
    return AdvantagePoint(spectrum, f_std, f_cat, F_std, F_cat, (F_cat - F_std) / F_std)


def advantage_map(resolution: float, d_r: int = 3, workers: int | None = None) -> list[AdvantagePoint]:
    """Advantage over the descending-ordered Schmidt simplex.

    Points are ``(i_1, ..., i_d) * resolution`` with ``i_1 >= ... >= i_d``;
    output order is the grid order regardless of ``workers``.
    """
    if not 0 < resolution <= 0.5:
        raise PreconditionError("resolution must be in (0, 0.5]")
    steps = int(round(1 / resolution))
    if abs(steps * resolution - 1) > 1e-9:
        raise PreconditionError(f"1/resolution must be an integer, got {1 / resolution}")
    grid = _ordered_grid(steps, d_r)
    if workers is None:
        workers = int(os.environ.get("CATPORT_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda p: advantage_point(p, d_r), grid))
    return [advantage_point(p, d_r) for p in grid]


def write_csv(points, out=None, full_triangle: bool = False) -> str:
    """Write map rows; with ``full_triangle`` every distinct permutation of
    each spectrum is emitted, covering the whole simplex.  Returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    points = list(points)
    d = len(points[0].lam) if points else 3
    header = CSV_HEADER if d == 3 else [f"lambda{i + 1}" for i in range(d)] + CSV_HEADER[3:]
    w.writerow(header)
    for pt in points:
        lams = [tuple(pt.lam.lambdas)]
        if full_triangle:
            lams = sorted(set(itertools.permutations(lams[0])), reverse=True)
        for lam in lams:
            w.writerow([repr(float(x)) for x in lam] + [
                repr(float(v)) for v in (pt.f_std, pt.f_cat_lb, pt.F_std, pt.F_cat_lb, pt.eta)])
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", newline="") as fh:
                fh.write(text)
    return text
