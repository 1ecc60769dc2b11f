"""Solver for the dual-norm regularized quantile regression program and the
robust fit derived from it.

The objective

    (1/N) sum_i check_loss(y_i - beta.x_i - s) + lam * ||(beta, -1)||_*

is piecewise linear plus (for the l2 transport norm) a smooth term, so one
first-order method covers all three norms: Polyak-style subgradient steps
with best-iterate tracking, followed by exact coordinate-wise minimization
and a min-norm subdifferential certificate.  The certificate is reported,
never assumed zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import lsq_linear

from . import kernels
from .constants import c_alpha_p, intercept_shift
from .core import (Dataset, DomainError, ProblemSpec, alpha_quantile,
                   dual_norm_aug, mean_check_loss)

_CHUNK_MIN = 200
_CHUNK_MAX = 2500


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 50000
    tol: float = 1e-6
    seed: int = 0
    step_rule: str = "polyak-diminishing"
    restarts: int = 3

    def __post_init__(self):
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")
        if not self.tol > 0.0:
            raise DomainError("tol must be > 0")
        if self.restarts < 1:
            raise DomainError("restarts must be >= 1")
        if self.step_rule != "polyak-diminishing":
            raise DomainError(f"unsupported step rule {self.step_rule!r}")


@dataclass(frozen=True)
class FitResult:
    """Slope, regularized and robust intercepts, and solver diagnostics."""

    beta: np.ndarray
    s_bar: float
    s_robust: float
    objective: float
    iterations: int
    optimality_residual: float
    converged: bool = True
    flags: tuple = ()
    spec: ProblemSpec | None = None
    lam: float = 0.0

    @property
    def beta_bar_dual_norm(self) -> float:
        assert self.spec is not None
        return dual_norm_aug(self.beta, self.spec.norm)


def _objective(X, y, alpha, lam, norm_code, beta, s) -> float:
    r = y - X @ beta - s
    return mean_check_loss(r, alpha) + lam * kernels.penalty_value(beta, norm_code)


def _pl_breakpoint_min(tvals, jumps, c0, fallback):
    """Minimizer of a convex piecewise-linear function given its breakpoints.

    ``c0`` is the slope left of every breakpoint and ``jumps`` the (positive)
    slope increments.  The minimum sits at the first breakpoint where the
    accumulated slope becomes nonnegative.
    """
    if tvals.size == 0:
        return fallback
    order = np.argsort(tvals, kind="stable")
    slope = c0 + np.cumsum(jumps[order])
    idx = int(np.searchsorted(slope >= 0.0, True))
    if c0 >= 0.0:
        return float(tvals[order[0]])
    if idx >= tvals.size:
        return float(tvals[order[-1]])
    return float(tvals[order[idx]])


def _loss_breakpoints(r, xj, beta_j, alpha, n):
    """Breakpoints/jumps of t -> (1/N) sum check_loss(r_i - (t - beta_j) x_ij)."""
    mask = np.abs(xj) > 0.0
    xm = xj[mask]
    tvals = beta_j + r[mask] / xm
    jumps = np.abs(xm) / n
    # slope as t -> -inf: residuals with x>0 sit on the positive side, x<0 negative
    c0 = float(np.sum(np.where(xm > 0.0, -alpha * xm, -(alpha - 1.0) * xm))) / n
    return tvals, jumps, c0


def _coordinate_min(r, xj, beta_j, alpha, n, lam, norm_code, other_beta):
    """Exact 1-d minimization of the objective along one slope coordinate."""
    tvals, jumps, c0 = _loss_breakpoints(r, xj, beta_j, alpha, n)
    if tvals.size == 0:
        return 0.0 if norm_code != kernels.NORM_CODES["l1"] else min(beta_j, 0.0, key=abs)
    if norm_code == kernels.NORM_CODES["linf"]:
        tvals = np.append(tvals, 0.0)
        jumps = np.append(jumps, 2.0 * lam)
        return _pl_breakpoint_min(tvals, jumps, c0 - lam, beta_j)
    if norm_code == kernels.NORM_CODES["l1"]:
        m = max(1.0, float(np.max(np.abs(other_beta)))) if other_beta.size else 1.0
        tvals = np.append(tvals, (-m, m))
        jumps = np.append(jumps, (lam, lam))
        return _pl_breakpoint_min(tvals, jumps, c0 - lam, beta_j)
    # smooth penalty lam * sqrt(t^2 + C^2): sweep intervals of the PL part
    C2 = float(other_beta @ other_beta) + 1.0
    order = np.argsort(tvals, kind="stable")
    tb = tvals[order]
    slopes = c0 + np.cumsum(jumps[order])  # PL slope right of each breakpoint
    pen_d = lam * tb / np.sqrt(tb * tb + C2)
    d_left = np.concatenate([[c0], slopes[:-1]]) + pen_d
    d_right = slopes + pen_d

    def root_of(c):
        # solve c + lam * t / sqrt(t^2 + C2) = 0
        if lam == 0.0 or abs(c) >= lam:
            return None
        u = -c / lam
        return u * math.sqrt(C2) / math.sqrt(1.0 - u * u)

    if d_left[0] > 0.0:
        t = root_of(c0)
        if t is not None and t < tb[0]:
            return float(t)
        return float(tb[0])
    at_bp = np.nonzero((d_left <= 0.0) & (d_right >= 0.0))[0]
    # first sign change across an interval (tb[k], tb[k+1])
    inside = np.nonzero((d_right[:-1] < 0.0) & (d_left[1:] > 0.0))[0]
    k_bp = at_bp[0] if at_bp.size else np.inf
    k_in = inside[0] if inside.size else np.inf
    if k_bp <= k_in:
        if at_bp.size:
            return float(tb[at_bp[0]])
    else:
        k = int(k_in)
        t = root_of(float(slopes[k]))
        if t is not None and tb[k] < t < tb[k + 1]:
            return float(t)
        return float(tb[k])
    if d_right[-1] < 0.0:
        t = root_of(float(slopes[-1]))
        if t is not None and t > tb[-1]:
            return float(t)
    return float(tb[-1])


def _polish(X, y, alpha, lam, norm_code, beta, s, max_cycles=None):
    """Cyclic exact coordinate minimization over (beta, s)."""
    beta = beta.copy()
    n, d = X.shape
    if max_cycles is None:
        max_cycles = 80 if n * max(d, 1) <= 50_000 else 25
    f = _objective(X, y, alpha, lam, norm_code, beta, s)
    for _ in range(max_cycles):
        s = alpha_quantile(y - X @ beta, alpha)
        r = y - X @ beta - s
        for j in range(d):
            xj = X[:, j]
            other = np.delete(beta, j)
            t = _coordinate_min(r, xj, beta[j], alpha, n, lam, norm_code, other)
            if t != beta[j]:
                r = r - (t - beta[j]) * xj
                beta[j] = t
        f_new = _objective(X, y, alpha, lam, norm_code, beta, s)
        if f - f_new <= 1e-16 * max(1.0, abs(f)):
            f = min(f, f_new)
            break
        f = f_new
    return beta, s, f


def _vertex_snap(X, y, alpha, lam, norm_code, beta, s, f):
    """Project onto the affine set zeroing the near-active residuals.

    Coordinate polish leaves the active kinks satisfied only to ~1e-8; the
    minimum-norm parameter correction makes them exact so the certificate
    sees genuine ties.  A snap that increases the objective is discarded.
    """
    n, d = X.shape
    scale = max(1.0, float(np.max(np.abs(y))))

    variants = [(beta, s, ())]
    if norm_code == kernels.NORM_CODES["l1"] and d and lam > 0.0:
        # the max-type penalty kinks at |beta_j| = 1; round near-boundary
        # coordinates exactly and keep them frozen during the residual snap
        near = np.nonzero((np.abs(np.abs(beta) - 1.0) <= 1e-5)
                          & (np.abs(beta) != 1.0))[0]
        if near.size:
            rounded = beta.copy()
            rounded[near] = np.copysign(1.0, rounded[near])
            variants.append((rounded, s, tuple(near)))

    out = (beta, s, f)
    for beta0, s0, frozen in variants:
        r = y - X @ beta0 - s0
        free = np.setdiff1d(np.arange(d), np.asarray(frozen, dtype=int))
        seen = -1
        for atol in (1e-12, 1e-9, 1e-7, 1e-5):
            idx = np.nonzero(np.abs(r) <= atol * scale)[0]
            if idx.size in (0, seen) or idx.size > free.size + 1:
                continue
            seen = idx.size
            M = np.column_stack([-X[np.ix_(idx, free)], -np.ones(idx.size)])
            delta, *_ = np.linalg.lstsq(M, -r[idx], rcond=None)
            beta2 = beta0.copy()
            beta2[free] += delta[:-1]
            s2 = s0 + delta[-1]
            f2 = _objective(X, y, alpha, lam, norm_code, beta2, s2)
            if f2 <= f + 1e-11 * max(1.0, abs(f)):
                out = (beta2, s2, f2)
    return out


def _smooth_refine(X, y, alpha, lam, norm_code, beta, s, tol, max_outer=30):
    """Active-set Newton for the smooth-penalty norm.

    With the l2 transport norm the optimum need not be a residual vertex: the
    smooth penalty gradient balances the fixed loss slopes on the manifold of
    active residuals.  Newton steps on that manifold (clipped at the first
    residual sign change, which then joins the active set) converge where
    first-order polishing only crawls.
    """
    n, d = X.shape
    scale = max(1.0, float(np.max(np.abs(y))))
    beta = beta.copy()
    s = float(s)
    f0 = _objective(X, y, alpha, lam, norm_code, beta, s)
    for _ in range(max_outer):
        r = y - X @ beta - s
        act = np.abs(r) <= 1e-7 * scale
        k = int(np.count_nonzero(act))
        if k >= d + 1:
            break
        w = np.where(r > 0.0, alpha, alpha - 1.0)
        w[act] = 0.0
        c = np.concatenate([-(X.T @ w) / n, [-float(np.sum(w)) / n]])
        if k:
            M = np.column_stack([X[act], np.ones(k)])
            _, sv, Vt = np.linalg.svd(M, full_matrices=True)
            rank = int(np.sum(sv > 1e-10 * (sv[0] if sv.size else 1.0)))
            Z = Vt[rank:].T
        else:
            Z = np.eye(d + 1)
        if Z.shape[1] == 0:
            break
        t = math.sqrt(float(beta @ beta) + 1.0)
        grad_full = c + lam * np.concatenate([beta, [0.0]]) / t
        g = Z.T @ grad_full
        if float(np.linalg.norm(g)) <= 0.25 * tol:
            break
        H = lam * (np.eye(d) / t - np.outer(beta, beta) / t ** 3)
        Hf = np.zeros((d + 1, d + 1))
        Hf[:d, :d] = H
        Hz = Z.T @ Hf @ Z + 1e-13 * np.eye(Z.shape[1])
        try:
            dirn = Z @ np.linalg.solve(Hz, -g)
        except np.linalg.LinAlgError:
            break
        u = X @ dirn[:d] + dirn[d]
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = np.where(np.abs(u) > 0.0, r / u, np.inf)
        cross = cross[~act & np.isfinite(cross) & (cross > 1e-18)]
        tau = float(np.min(cross)) if cross.size else math.inf
        step = min(1.0, tau)
        if not math.isfinite(step) or step <= 0.0:
            break
        beta2 = beta + step * dirn[:d]
        s2 = s + step * dirn[d]
        f2 = _objective(X, y, alpha, lam, norm_code, beta2, s2)
        if f2 > f0 + 1e-12 * max(1.0, abs(f0)):
            break
        moved = step * float(np.linalg.norm(dirn))
        beta, s, f0 = beta2, s2, f2
        if moved <= 1e-15 * max(1.0, float(np.linalg.norm(beta))):
            break
    return beta, s, f0


def _project_simplex(w, total):
    """Euclidean projection onto {w >= 0, sum w = total}."""
    if w.size == 0:
        return w
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - total
    rho = np.nonzero(u * np.arange(1, w.size + 1) > css)[0]
    if rho.size == 0:
        return np.full_like(w, total / w.size)
    theta = css[rho[-1]] / (rho[-1] + 1.0)
    return np.maximum(w - theta, 0.0)


def optimality_residual(X, y, alpha, lam, norm_code, beta, s) -> float:
    """Minimum Euclidean norm over the subdifferential of the objective."""
    return _min_norm_subgradient(X, y, alpha, lam, norm_code, beta, s)[0]


def _min_norm_subgradient(X, y, alpha, lam, norm_code, beta, s):
    """Minimum-norm element of the subdifferential and its value.

    Check-loss subgradients at (numerically) zero residuals range over
    [alpha - 1, alpha]; penalty subdifferentials contribute box or simplex
    freedom depending on the norm.  The minimization is a small projected
    gradient run over those free coordinates.
    """
    n, d = X.shape
    r = y - X @ beta - s
    scale = max(1.0, float(np.max(np.abs(y))) if n else 1.0)
    ztol = 1e-7 * scale
    btol = 1e-9 * max(1.0, float(np.max(np.abs(beta))) if d else 1.0)

    tied = np.abs(r) <= ztol
    w_fixed = np.where(r > 0.0, alpha, alpha - 1.0)
    w_fixed[tied] = 0.0
    g0 = np.concatenate([-(X.T @ w_fixed) / n, [-float(np.sum(w_fixed)) / n]])

    cols = []      # columns multiplying free variables
    lo, hi = [], []
    simplex_idx = None
    simplex_total = 0.0
    simplex_eq = False

    for i in np.nonzero(tied)[0]:
        cols.append(np.concatenate([-X[i] / n, [-1.0 / n]]))
        lo.append(alpha - 1.0)
        hi.append(alpha)

    if norm_code == kernels.NORM_CODES["l2"]:
        g0[:d] += lam * beta / math.sqrt(float(beta @ beta) + 1.0)
    elif norm_code == kernels.NORM_CODES["linf"]:
        for j in range(d):
            if abs(beta[j]) > btol:
                g0[j] += lam * math.copysign(1.0, beta[j])
            else:
                e = np.zeros(d + 1)
                e[j] = 1.0
                cols.append(e)
                lo.append(-lam)
                hi.append(lam)
    else:  # l1 primal: penalty max(max|beta|, 1)
        m = float(np.max(np.abs(beta))) if d else 0.0
        if m > 1.0 - btol and lam > 0.0 and d:
            arg = np.nonzero(np.abs(beta) >= m - btol)[0]
            if arg.size == 1 and m > 1.0 + btol:
                j = int(arg[0])
                g0[j] += lam * math.copysign(1.0, beta[j])
            elif arg.size == 1:
                e = np.zeros(d + 1)
                j = int(arg[0])
                e[j] = math.copysign(1.0, beta[j]) if beta[j] != 0.0 else 1.0
                cols.append(e)
                lo.append(0.0)
                hi.append(lam)
            else:
                start = len(cols)
                for j in arg:
                    e = np.zeros(d + 1)
                    e[j] = math.copysign(1.0, beta[j]) if beta[j] != 0.0 else 1.0
                    cols.append(e)
                    lo.append(0.0)
                    hi.append(lam)
                simplex_idx = (start, len(cols))
                simplex_total = lam
                simplex_eq = m > 1.0 + btol

    if not cols:
        return float(np.linalg.norm(g0)), g0

    A = np.column_stack(cols)
    lo = np.asarray(lo)
    hi = np.asarray(hi)
    if simplex_idx is None:
        sol = lsq_linear(A, -g0, bounds=(lo, hi), tol=1e-14)
        g = g0 + A @ sol.x
        return float(np.linalg.norm(g)), g
    L = float(np.linalg.norm(A, 2)) ** 2 or 1.0

    def project(z):
        z = np.clip(z, lo, hi)
        if simplex_idx is not None:
            a, b = simplex_idx
            seg = np.maximum(z[a:b], 0.0)
            if simplex_eq or float(np.sum(seg)) > simplex_total:
                seg = _project_simplex(seg, simplex_total)
            z[a:b] = seg
        return z

    # accelerated projected gradient on the tiny box/simplex quadratic
    z = project(np.zeros(A.shape[1]))
    v = z.copy()
    t_acc = 1.0
    for it in range(3000):
        grad = A.T @ (g0 + A @ v)
        z_new = project(v - grad / L)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_acc * t_acc))
        v = z_new + (t_acc - 1.0) / t_new * (z_new - z)
        moved = float(np.max(np.abs(z_new - z)))
        z, t_acc = z_new, t_new
        if moved < 1e-17:
            break
        if it % 25 == 24:
            # stationarity of the projected point is the stopping criterion
            g_now = g0 + A @ z
            pg = z - project(z - (A.T @ g_now) / L)
            if float(np.linalg.norm(pg)) * L <= max(1e-13, 2e-5 * float(np.linalg.norm(g_now))):
                break
    g = g0 + A @ z
    return float(np.linalg.norm(g)), g


def _line_search(X, y, alpha, lam, norm_code, beta, s, dbeta, ds, f0):
    """Minimize the convex objective along a unit ray (golden section)."""

    def phi(t):
        return _objective(X, y, alpha, lam, norm_code, beta + t * dbeta, s + t * ds)

    t_hi = 1e-7 * max(1.0, float(np.max(np.abs(beta))) if beta.size else 1.0, abs(s))
    f_hi = phi(t_hi)
    if f_hi > f0:
        # shrink until the ray improves or vanishes
        for _ in range(40):
            t_hi *= 0.25
            f_hi = phi(t_hi)
            if f_hi <= f0:
                break
        else:
            return 0.0, f0
    for _ in range(80):
        f_next = phi(t_hi * 2.0)
        if f_next >= f_hi:
            break
        t_hi *= 2.0
        f_hi = f_next
    a, b = 0.0, t_hi * 2.0
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c1, c2 = b - gr * (b - a), a + gr * (b - a)
    f1, f2 = phi(c1), phi(c2)
    for _ in range(90):
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - gr * (b - a)
            f1 = phi(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + gr * (b - a)
            f2 = phi(c2)
    t = 0.5 * (a + b)
    ft = phi(t)
    if f_hi < ft:
        t, ft = t_hi, f_hi
    return (t, ft) if ft < f0 else (0.0, f0)


def _starting_points(data: Dataset, alpha: float, restarts: int, seed: int):
    starts = []
    beta0 = np.zeros(data.d)
    starts.append((beta0, alpha_quantile(data.y, alpha)))
    if data.d:
        A = np.column_stack([data.X, np.ones(data.n)])
        sol, *_ = np.linalg.lstsq(A, data.y, rcond=None)
        beta_ls = sol[:-1]
        starts.append((beta_ls, alpha_quantile(data.y - data.X @ beta_ls, alpha)))
    rng = np.random.default_rng(seed)
    while len(starts) < restarts:
        base_beta, base_s = starts[min(1, len(starts) - 1)]
        scale = 1.0 + float(np.max(np.abs(base_beta))) if base_beta.size else 1.0
        starts.append((base_beta + 0.5 * scale * rng.standard_normal(data.d),
                       base_s + 0.5 * rng.standard_normal()))
    return starts[:max(restarts, 1)]


def fit_regularized(data: Dataset, spec: ProblemSpec, lam: float,
                    cfg: SolverConfig | None = None) -> FitResult:
    """Minimize the empirical check loss plus ``lam * ||(beta, -1)||_*``.

    The robust intercept is filled only when ``lam`` matches the radius in
    ``spec`` through the penalty coefficient; otherwise ``s_robust`` equals
    ``s_bar`` and the result carries a ``no-dro-shift`` flag.
    """
    cfg = cfg or SolverConfig()
    lam = float(lam)
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be finite and >= 0, got {lam}")
    X, y = data.X, data.y
    alpha = spec.alpha
    code = kernels.NORM_CODES[spec.norm]

    best = None  # (objective, residual, beta, s, iters)
    kernel = kernels.select_kernel(data.n, data.d)
    total_iters = 0
    chunk = max(_CHUNK_MIN, min(_CHUNK_MAX, cfg.max_iters // 6 or cfg.max_iters))
    converged = False

    for beta0, s0 in _starting_points(data, alpha, cfg.restarts, cfg.seed):
        beta = np.asarray(beta0, dtype=float).copy()
        s = float(s0)
        f_best = _objective(X, y, alpha, lam, code, beta, s)
        beta_b, s_b = beta.copy(), s
        delta0 = 0.25 * max(f_best, 1e-9)
        used = 0
        res = math.inf
        while used < cfg.max_iters:
            it = min(chunk, cfg.max_iters - used)
            beta, s, f_best, beta_b, s_b, _ = kernel(
                X, y, alpha, lam, code, beta, s, it, float(used), delta0,
                f_best, beta_b, s_b)
            used += it
            pb, ps, pf = _polish(X, y, alpha, lam, code, beta_b, s_b)
            pb, ps, pf = _vertex_snap(X, y, alpha, lam, code, pb, ps, pf)
            smooth = code == kernels.NORM_CODES["l2"] and lam > 0.0
            if smooth:
                pb, ps, pf = _smooth_refine(X, y, alpha, lam, code, pb, ps, cfg.tol)
                pb, ps, pf = _vertex_snap(X, y, alpha, lam, code, pb, ps, pf)
            # steepest-descent refinement along the min-norm subgradient
            descent_cap = 80 if X.size <= 5000 else 30
            for _ in range(descent_cap):
                res, g = _min_norm_subgradient(X, y, alpha, lam, code, pb, ps)
                if res <= cfg.tol:
                    break
                u = g / res
                t, f_new = _line_search(X, y, alpha, lam, code, pb, ps,
                                        -u[:-1], -u[-1], pf)
                if f_new >= pf - 1e-18 * max(1.0, abs(pf)):
                    break
                pb, ps = pb - t * u[:-1], ps - t * u[-1]
                pb, ps, pf = _polish(X, y, alpha, lam, code, pb, ps, max_cycles=6)
                if smooth:
                    pb, ps, pf = _smooth_refine(X, y, alpha, lam, code, pb, ps, cfg.tol)
                pb, ps, pf = _vertex_snap(X, y, alpha, lam, code, pb, ps, pf)
            if res <= cfg.tol:
                # tight final pass; keep only if the certificate stays satisfied
                tb, ts, tf = _polish(X, y, alpha, lam, code, pb, ps)
                tb, ts, tf = _vertex_snap(X, y, alpha, lam, code, tb, ts, tf)
                tres, _ = _min_norm_subgradient(X, y, alpha, lam, code, tb, ts)
                if tf <= pf and tres <= cfg.tol:
                    pb, ps, pf, res = tb, ts, tf, tres
            if pf <= f_best:
                beta_b, s_b, f_best = pb, ps, pf
                beta, s = pb.copy(), ps
            if res <= cfg.tol:
                break
        total_iters += used
        res, _ = _min_norm_subgradient(X, y, alpha, lam, code, beta_b, s_b)
        # prefer certified solutions, then objective, then residual
        cand = (res > cfg.tol, f_best, res, beta_b, s_b)
        if best is None or cand[:3] < best[:3]:
            best = cand
        if res <= cfg.tol:
            converged = True
            break

    _, f_best, res, beta_b, s_b = best
    objective = _objective(X, y, alpha, lam, code, beta_b, s_b)
    converged = res <= cfg.tol
    flags = []
    if not converged:
        flags.append("nonconverged")
        warnings.warn(
            f"solver stopped at optimality residual {res:.3e} > tol {cfg.tol:.1e}",
            RuntimeWarning, stacklevel=2)

    expected_lam = c_alpha_p(alpha, spec.p) * spec.epsilon
    if abs(lam - expected_lam) <= 1e-12 * max(1.0, lam, expected_lam):
        shift = intercept_shift(alpha, spec.p, spec.epsilon,
                                dual_norm_aug(beta_b, spec.norm))
    else:
        shift = 0.0
        flags.append("no-dro-shift")

    return FitResult(beta=beta_b, s_bar=float(s_b), s_robust=float(s_b + shift),
                     objective=float(objective), iterations=total_iters,
                     optimality_residual=float(res), converged=converged,
                     flags=tuple(flags), spec=spec, lam=lam)


def fit_dro(data: Dataset, spec: ProblemSpec, cfg: SolverConfig | None = None) -> FitResult:
    """Robust fit: solve the reformulation at ``lam = c * epsilon`` and shift
    the intercept; the reported objective is the robust optimal value."""
    lam = c_alpha_p(spec.alpha, spec.p) * spec.epsilon
    return fit_regularized(data, spec, lam, cfg)


def fit_saa(data: Dataset, spec: ProblemSpec, cfg: SolverConfig | None = None) -> FitResult:
    """Plain empirical-risk fit (zero radius)."""
    return fit_dro(data, spec.with_epsilon(0.0), cfg)


def predict_quantile(fit: FitResult, x) -> float | np.ndarray:
    """Evaluate ``beta.x + s_robust`` at one point or a batch of rows."""
    x = np.asarray(x, dtype=float)
    d = fit.beta.shape[0]
    if x.ndim == 1:
        if x.shape[0] != d:
            raise DomainError(f"x has length {x.shape[0]}, expected {d}")
        return float(x @ fit.beta + fit.s_robust)
    if x.ndim == 2:
        if x.shape[1] != d:
            raise DomainError(f"x has {x.shape[1]} columns, expected {d}")
        return x @ fit.beta + fit.s_robust
    raise DomainError("x must be a vector or a matrix of rows")
