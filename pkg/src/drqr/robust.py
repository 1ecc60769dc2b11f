"""Worst-case expected check loss over the ambiguity ball for a fixed fit.

Evaluation always goes through the one-dimensional projection: the residual
law is the reference distribution and the effective radius is the ambiguity
radius scaled by the dual norm of the augmented coefficient.  Closed forms
cover the boundary orders; finite orders above one run a convex search over
the dual multiplier.

``oracle_sup`` is the independent check: it maximizes the finite atom-split
program (each empirical atom may split into two displaced weighted copies
subject to the transport budget) by linear programming on displacement grids
with local refinement.  It never touches the dual constants, so agreement
with the closed forms is evidence, not restatement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .constants import c_alpha_p, k_constants, lambda_star
from .core import (Dataset, DomainError, ConvergenceError, ProblemSpec,
                   WeightedPointCloud, check_loss, dual_norm_aug,
                   mean_check_loss)

_ORACLE_MAX_ATOMS = 12


@dataclass(frozen=True)
class InnerSupResult:
    value: float
    lambda_opt: float | None
    attained: bool


def project_residuals(data: Dataset, beta, s: float) -> np.ndarray:
    """Residuals y - beta.x - s, the one-dimensional reference atoms."""
    return data.residuals(beta, s)


def effective_radius(spec: ProblemSpec, beta) -> float:
    return spec.epsilon * dual_norm_aug(beta, spec.norm)


def worst_case_value_1d(z: np.ndarray, alpha: float, p: float, radius: float,
                        weights=None, rel_tol: float = 1e-10) -> InnerSupResult:
    """Supremum of the expected check loss over a 1-d ball around the atoms ``z``."""
    z = np.asarray(z, dtype=float).ravel()
    if not radius >= 0.0:
        raise DomainError("radius must be >= 0")
    base = mean_check_loss(z, alpha, weights)
    if radius == 0.0:
        return InnerSupResult(base, None, True)
    if p == 1.0:
        if alpha > 0.5:
            attained = bool(np.any(z >= 0.0))
        elif alpha < 0.5:
            attained = bool(np.any(z <= 0.0))
        else:
            attained = True
        return InnerSupResult(base + radius * max(alpha, 1.0 - alpha), None, attained)
    if math.isinf(p):
        shifted = mean_check_loss(z + (2.0 * alpha - 1.0) * radius, alpha, weights)
        return InnerSupResult(shifted + 2.0 * alpha * (1.0 - alpha) * radius, None, True)

    q = p / (p - 1.0)
    k1, k2 = k_constants(alpha, p)

    def dual(lam: float) -> float:
        t = lam ** (1.0 - q)
        return (mean_check_loss(z + k2 * t, alpha, weights)
                + lam * radius ** p + k1 * t)

    lam0 = lambda_star(alpha, p, radius)
    lo, hi = lam0 / 100.0, lam0 * 100.0
    # expand geometrically while the minimum sits at a bracket edge
    for _ in range(60):
        flo, fmidlo = dual(lo), dual(lo * 4.0)
        fhi, fmidhi = dual(hi), dual(hi / 4.0)
        grow = False
        if flo < fmidlo:
            lo /= 100.0
            grow = True
        if fhi < fmidhi:
            hi *= 100.0
            grow = True
        if not grow:
            break
    else:
        raise ConvergenceError(
            f"dual multiplier search failed to bracket a minimum in [{lo:.3e}, {hi:.3e}]")

    a, b = math.log(lo), math.log(hi)
    for _ in range(300):
        if b - a < 1e-13 * max(1.0, abs(a), abs(b)):
            break
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if dual(math.exp(m1)) <= dual(math.exp(m2)):
            b = m2
        else:
            a = m1
    lam_opt = math.exp(0.5 * (a + b))
    val = dual(lam_opt)
    # the dual search can only overshoot upward; keep consistency with rel_tol
    for lam in (lam0,):
        v = dual(lam)
        if v < val:
            val, lam_opt = v, lam
    return InnerSupResult(float(val), float(lam_opt), True)


def worst_case_value(data: Dataset, beta, s: float, spec: ProblemSpec,
                     rel_tol: float = 1e-10) -> InnerSupResult:
    """Supremum of the expected check loss over the ambiguity ball at (beta, s)."""
    z = project_residuals(data, beta, s)
    return worst_case_value_1d(z, spec.alpha, spec.p, effective_radius(spec, beta),
                               rel_tol=rel_tol)


# ---------------------------------------------------------------------------
# brute-force oracle: finite atom-split maximization on displacement grids
# ---------------------------------------------------------------------------

def _candidate_grid(z, radius, p, n, resolution, alpha=0.5, span=None, jitter=None):
    """Per-atom candidate target values for the split program."""
    if span is None:
        zmax = float(np.max(np.abs(z))) if len(z) else 0.0
        if math.isinf(p):
            span = radius
        elif p == 1.0:
            # the supremum may be approached only by far vanishing mass; the
            # truncation error decays like radius * |z| / span, so take the
            # span large enough for ~1e-5 relative truncation error
            span = max(n * radius * 1.05 + zmax + radius,
                       radius * max(1.0, zmax) * 4e4)
        else:
            # a whole atom can travel radius * n^(1/p); a split tail sliver
            # can travel radius * min(alpha, 1-alpha)^(-1/p); a kink-crossing
            # sliver from distance g is value-optimal at displacement q * g
            reach = max(float(n), 1.0 / min(alpha, 1.0 - alpha))
            q = p / (p - 1.0)
            span = max(reach ** (1.0 / p) * radius, q * zmax + radius) * 1.1
    tiny = max(radius * 1e-3, 1e-12)
    mags = np.geomspace(tiny, span, resolution)
    if jitter is not None:
        mags = mags * np.exp(jitter.uniform(-0.1, 0.1, size=mags.size))
        mags = np.clip(mags, 0.0, span)
    cands = []
    for zi in z:
        vals = np.concatenate([[zi], zi + mags, zi - mags, [0.0]])
        cands.append(np.unique(vals))
    return cands, span


def _split_lp(z, weights, alpha, p, budget, cands):
    """LP value of the atom-split program restricted to candidate targets.

    max sum_i sum_v m_iv * check_loss(v)  s.t.  sum_v m_iv = w_i,
    sum m_iv |v - z_i|^p <= budget, m >= 0.
    """
    n = len(z)
    sizes = [c.size for c in cands]
    total = int(np.sum(sizes))
    obj = np.concatenate([-check_loss(c, alpha) for c in cands])
    cost = np.concatenate([np.abs(c - zi) ** p for c, zi in zip(cands, z)])
    A_eq = np.zeros((n, total))
    pos = 0
    for i, sz in enumerate(sizes):
        A_eq[i, pos:pos + sz] = 1.0
        pos += sz
    res = linprog(obj, A_ub=cost.reshape(1, -1), b_ub=[budget],
                  A_eq=A_eq, b_eq=np.asarray(weights, dtype=float),
                  bounds=(0.0, None), method="highs")
    if not res.success:
        raise ConvergenceError(f"atom-split LP failed: {res.message}")
    return -float(res.fun), res.x


def _refine_candidates(cands, x, sizes, z, shrink):
    """New candidate sets localized around the targets the LP actually used."""
    new = []
    pos = 0
    for i, sz in enumerate(sizes):
        mass = x[pos:pos + sz]
        used = cands[i][mass > 1e-13]
        vals = [np.array([z[i], 0.0])]
        for v in used:
            dv = abs(v - z[i])
            if dv == 0.0:
                continue
            local = np.linspace(dv / shrink, dv * shrink, 9)
            vals.append(z[i] + math.copysign(1.0, v - z[i]) * local)
        new.append(np.unique(np.concatenate(vals)))
        pos += sz
    return new


def oracle_sup(data: Dataset, beta, s: float, spec: ProblemSpec,
               grid: int = 28, refinements: int = 2, restarts: int = 1,
               seed: int = 0, span: float | None = None) -> float:
    """Lower-bound oracle for the worst-case expected check loss.

    Maximizes the finite split program by LP over displacement grids with
    local refinement; restarts rerun the whole search from jittered grids.
    Refuses datasets larger than twelve atoms (the search is a desk-scale
    certification tool, not a production path).
    """
    if data.n > _ORACLE_MAX_ATOMS:
        raise DomainError(
            f"oracle refuses N = {data.n} > {_ORACLE_MAX_ATOMS} atoms (budget guard)")
    z = project_residuals(data, beta, s)
    radius = effective_radius(spec, beta)
    alpha, p = spec.alpha, spec.p
    n = data.n
    if radius == 0.0:
        return mean_check_loss(z, alpha)
    if math.isinf(p):
        # per-atom interval maximum; convexity puts it at an endpoint
        lo = check_loss(z - radius, alpha)
        hi = check_loss(z + radius, alpha)
        return float(np.mean(np.maximum(lo, hi)))

    weights = np.full(n, 1.0 / n)
    budget = radius ** p
    best = -math.inf
    for rs in range(max(1, restarts)):
        jit = np.random.default_rng(seed + rs) if rs else None
        cands, _ = _candidate_grid(z, radius, p, n, grid, alpha=alpha, span=span, jitter=jit)
        val, x = _split_lp(z, weights, alpha, p, budget, cands)
        for _ in range(refinements):
            sizes = [c.size for c in cands]
            cands = _refine_candidates(cands, x, sizes, z, shrink=1.35)
            val2, x = _split_lp(z, weights, alpha, p, budget, cands)
            if val2 > val:
                val = val2
        best = max(best, val)
    return float(best)


# ---------------------------------------------------------------------------
# additive-identity audit for location-adjusted losses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityAuditReport:
    loss: str
    epsilon: float
    p: float
    value_sup: float       # sup over the ball of the location-adjusted loss
    value_base: float      # location-adjusted loss at the reference law
    implied_c: float | None
    expected_c: float | None
    gap: float | None
    holds: bool | None


def _loss_fn(loss: str, alpha: float | None, delta: float):
    if loss == "check":
        if alpha is None:
            raise DomainError("check loss requires alpha")
        return lambda u: check_loss(u, alpha)
    if loss == "squared":
        return lambda u: np.square(u)
    if loss == "huber":
        d = float(delta)

        def _huber(u):
            u = np.asarray(u, dtype=float)
            a = np.abs(u)
            return np.where(a <= d, 0.5 * u * u, d * (a - 0.5 * d))

        return _huber
    raise DomainError(f"unsupported loss tag {loss!r}; expected check, squared or huber")


def _location_adjusted(values, weights, fn, atoms_only=False):
    """inf_s E[fn(Z - s)] for a discrete law; golden refine unless atoms_only."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    cand = np.unique(values)
    evals = [float(np.sum(weights * fn(values - s))) for s in cand]
    k = int(np.argmin(evals))
    if atoms_only:
        return evals[k]
    lo = cand[max(0, k - 1)]
    hi = cand[min(cand.size - 1, k + 1)]
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - gr * (b - a)
    c2 = a + gr * (b - a)
    f1 = float(np.sum(weights * fn(values - c1)))
    f2 = float(np.sum(weights * fn(values - c2)))
    for _ in range(120):
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - gr * (b - a)
            f1 = float(np.sum(weights * fn(values - c1)))
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + gr * (b - a)
            f2 = float(np.sum(weights * fn(values - c2)))
    s = 0.5 * (a + b)
    return min(evals[k], float(np.sum(weights * fn(values - s))))


def _sup_location_adjusted_check(z, weights, alpha, p, budget, cands):
    """Exact grid value of max over the polytope of min_s E[check(Z - s)].

    For the check loss the inner minimum sits at a support atom, so the
    max-min program is one LP with a candidate-location constraint per grid
    value.
    """
    n = len(z)
    sizes = [c.size for c in cands]
    total = int(np.sum(sizes))
    flat = np.concatenate(cands)
    svals = np.unique(flat)
    # variables: (m, t); maximize t  s.t.  t <= sum m_iv * check(v - s_j)
    c_obj = np.zeros(total + 1)
    c_obj[-1] = -1.0
    rows = []
    for sj in svals:
        row = np.zeros(total + 1)
        row[:total] = -check_loss(flat - sj, alpha)
        row[-1] = 1.0
        rows.append(row)
    cost_row = np.zeros(total + 1)
    cost_row[:total] = np.concatenate(
        [np.abs(c - zi) ** p for c, zi in zip(cands, z)])
    A_ub = np.vstack(rows + [cost_row])
    b_ub = np.concatenate([np.zeros(len(svals)), [budget]])
    A_eq = np.zeros((n, total + 1))
    pos = 0
    for i, sz in enumerate(sizes):
        A_eq[i, pos:pos + sz] = 1.0
        pos += sz
    bounds = [(0.0, None)] * total + [(None, None)]
    res = linprog(c_obj, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq,
                  b_eq=np.asarray(weights, dtype=float), bounds=bounds,
                  method="highs")
    if not res.success:
        raise ConvergenceError(f"max-min LP failed: {res.message}")
    return -float(res.fun), res.x[:total]


def _sup_location_adjusted_smooth(z, weights, p, budget, cands, fn, iters=160):
    """Frank-Wolfe maximization of the concave map m -> inf_s E^m[fn(Z - s)]."""
    n = len(z)
    sizes = [c.size for c in cands]
    total = int(np.sum(sizes))
    flat = np.concatenate(cands)
    cost = np.concatenate([np.abs(c - zi) ** p for c, zi in zip(cands, z)])
    A_eq = np.zeros((n, total))
    pos = 0
    for i, sz in enumerate(sizes):
        A_eq[i, pos:pos + sz] = 1.0
        pos += sz

    def inner_s(m):
        # location minimizer of the mixed law
        sup = flat[m > 1e-14]
        if sup.size == 0:
            sup = np.array([0.0])
        cand = np.unique(sup)
        vals = [float(np.sum(m * fn(flat - s))) for s in cand]
        k = int(np.argmin(vals))
        a = cand[max(0, k - 1)]
        b = cand[min(cand.size - 1, k + 1)]
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        c1, c2 = b - gr * (b - a), a + gr * (b - a)
        f1 = float(np.sum(m * fn(flat - c1)))
        f2 = float(np.sum(m * fn(flat - c2)))
        for _ in range(90):
            if f1 <= f2:
                b, c2, f2 = c2, c1, f1
                c1 = b - gr * (b - a)
                f1 = float(np.sum(m * fn(flat - c1)))
            else:
                a, c1, f1 = c1, c2, f2
                c2 = a + gr * (b - a)
                f2 = float(np.sum(m * fn(flat - c2)))
        s = 0.5 * (a + b)
        val = float(np.sum(m * fn(flat - s)))
        if vals[k] < val:
            return cand[k], vals[k]
        return s, val

    # feasible start: no displacement
    m = np.zeros(total)
    pos = 0
    for i, sz in enumerate(sizes):
        j = int(np.argmin(np.abs(cands[i] - z[i])))
        m[pos + j] = weights[i]
        pos += sz

    value = inner_s(m)[1]
    for _ in range(iters):
        s_star, value = inner_s(m)
        grad = fn(flat - s_star)  # supergradient by the envelope rule
        res = linprog(-grad, A_ub=cost.reshape(1, -1), b_ub=[budget],
                      A_eq=A_eq, b_eq=np.asarray(weights, dtype=float),
                      bounds=(0.0, None), method="highs")
        if not res.success:
            raise ConvergenceError(f"Frank-Wolfe LP failed: {res.message}")
        direction = res.x - m
        # golden line search on the concave 1-d slice
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = 0.0, 1.0
        c1, c2 = b - gr * (b - a), a + gr * (b - a)
        f1 = inner_s(m + c1 * direction)[1]
        f2 = inner_s(m + c2 * direction)[1]
        for _ in range(40):
            if f1 >= f2:
                b, c2, f2 = c2, c1, f1
                c1 = b - gr * (b - a)
                f1 = inner_s(m + c1 * direction)[1]
            else:
                a, c1, f1 = c1, c2, f2
                c2 = a + gr * (b - a)
                f2 = inner_s(m + c2 * direction)[1]
        t = 0.5 * (a + b)
        new = m + t * direction
        new_val = inner_s(new)[1]
        if new_val <= value + 1e-14:
            break
        m, value = new, new_val
    return value, m


def identity_audit(loss: str, g0: WeightedPointCloud, epsilon: float, p: float,
                   *, alpha: float | None = None, delta: float = 1.0,
                   tol: float = 2e-2, grid: int = 24,
                   refinements: int = 1) -> IdentityAuditReport:
    """Numerically audit whether robustness acts as an additive constant.

    Computes the worst-case location-adjusted loss over the ball around a
    one-dimensional cloud by the split oracle, the same quantity at the
    reference cloud, and the implied additive constant per unit radius.  For
    the check loss the constant is compared against the closed form.
    """
    if g0.d != 0:
        raise DomainError("identity audit expects a one-dimensional cloud")
    if not (1.0 < p < math.inf):
        raise DomainError("identity audit is defined for p in (1, inf)")
    if g0.size > _ORACLE_MAX_ATOMS:
        raise DomainError(f"audit refuses clouds larger than {_ORACLE_MAX_ATOMS} atoms")
    fn = _loss_fn(loss, alpha, delta)
    z = g0.ys
    w = g0.weights
    base = _location_adjusted(z, w, fn, atoms_only=(loss == "check"))
    if epsilon == 0.0:
        expected = c_alpha_p(alpha, p) if loss == "check" else None
        return IdentityAuditReport(loss, 0.0, p, base, base, None, expected,
                                   0.0 if loss == "check" else None,
                                   True if loss == "check" else None)
    budget = float(epsilon) ** p
    cands, _ = _candidate_grid(z, float(epsilon), p, g0.size, grid,
                               alpha=alpha if alpha is not None else 0.5)
    if loss == "check":
        val, x = _sup_location_adjusted_check(z, w, alpha, p, budget, cands)
        for _ in range(refinements):
            sizes = [c.size for c in cands]
            cands = _refine_candidates(cands, x, sizes, z, shrink=1.35)
            v2, x = _sup_location_adjusted_check(z, w, alpha, p, budget, cands)
            val = max(val, v2)
        expected = c_alpha_p(alpha, p)
        rhs = base + expected * epsilon
        gap = abs(val - rhs)
        return IdentityAuditReport(loss, float(epsilon), p, float(val), float(base),
                                   (val - base) / epsilon, expected, gap, gap <= tol)
    val, x = _sup_location_adjusted_smooth(z, w, p, budget, cands, fn)
    for _ in range(refinements):
        sizes = [c.size for c in cands]
        cands = _refine_candidates(cands, x, sizes, z, shrink=1.35)
        v2, x = _sup_location_adjusted_smooth(z, w, p, budget, cands, fn)
        val = max(val, v2)
    return IdentityAuditReport(loss, float(epsilon), p, float(val), float(base),
                               (val - base) / epsilon, None, None, None)
