"""Explicit worst-case distributions as weighted point clouds.

Every constructor translates empirical atoms along the unit direction that
achieves the dual norm of the augmented coefficient, so that a displacement
of magnitude t changes the residual by exactly t times the dual norm while
costing exactly t in transport.  Ball membership and attainment are verified
numerically on the identity coupling and reported, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import c_alpha_p
from .core import (Dataset, DomainError, ProblemSpec, WeightedPointCloud,
                   augment, dual_direction, dual_norm_aug, primal_norm)
from .robust import worst_case_value
from .solver import FitResult

_ATTAIN_TOL = 1e-8


@dataclass(frozen=True)
class WorstCaseReport:
    cloud: WeightedPointCloud | None
    transport_cost: float
    achieved_value: float | None
    closed_form_value: float
    attained: bool
    flags: tuple = ()


def _direction(beta: np.ndarray, norm: str) -> np.ndarray:
    """Unit vector v with (-beta, 1).v equal to the dual norm of (beta, -1)."""
    return dual_direction(-augment(beta), norm)


def _coupling_cost(base_xs, base_ys, xs, ys, weights, norm: str, p: float) -> float:
    """Transport cost of the identity coupling between matched rows."""
    diffs = np.column_stack([xs - base_xs, ys - base_ys]) if base_xs.size else (ys - base_ys).reshape(-1, 1)
    norms = np.array([primal_norm(row, norm) for row in diffs])
    if math.isinf(p):
        moved = weights > 0.0
        return float(np.max(norms[moved])) if np.any(moved) else 0.0
    return float(np.sum(weights * norms ** p)) ** (1.0 / p)


def _report(data, beta, s_eval, spec, xs, ys, weights, base_xs, base_ys, flags=()):
    cloud = WeightedPointCloud(xs, ys, weights)
    cost = _coupling_cost(base_xs, base_ys, xs, ys, weights, spec.norm, spec.p)
    achieved = cloud.check_loss_at(np.atleast_1d(beta), s_eval, spec.alpha)
    closed = worst_case_value(data, beta, s_eval, spec).value
    attained = abs(achieved - closed) <= _ATTAIN_TOL * max(1.0, abs(closed))
    return WorstCaseReport(cloud, cost, achieved, closed, attained, tuple(flags))


def worst_case_p1(data: Dataset, beta, s: float, spec: ProblemSpec) -> WorstCaseReport:
    """Order-1 worst case: push the favorable-sign atoms, mass-inverse scaled.

    At alpha = 1/2 every atom moves by the radius along its residual sign and
    the supremum is always attained; otherwise the favorable tail is pushed
    by epsilon over its mass, and an empty tail means non-attainment (the
    cloud is omitted, the supremum value is still reported).
    """
    if spec.p != 1.0:
        raise DomainError("worst_case_p1 requires p = 1")
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    z = data.residuals(beta, s)
    n = data.n
    weights = np.full(n, 1.0 / n)
    v = _direction(beta, spec.norm)
    closed = worst_case_value(data, beta, s, spec)
    alpha, eps = spec.alpha, spec.epsilon
    if alpha == 0.5:
        sign = np.where(z >= 0.0, 1.0, -1.0)
        disp = eps * sign[:, None] * v[None, :]
    else:
        favorable = z >= 0.0 if alpha > 0.5 else z <= 0.0
        pi = float(np.mean(favorable))
        if pi == 0.0:
            return WorstCaseReport(None, 0.0, None, closed.value, False,
                                   ("favorable-event-empty",))
        orient = 1.0 if alpha > 0.5 else -1.0
        disp = np.where(favorable[:, None], orient * eps / pi * v[None, :], 0.0)
    xs = data.X + disp[:, : data.d]
    ys = data.y + disp[:, data.d]
    return _report(data, beta, s, spec, xs, ys, weights, data.X, data.y)


def worst_case_pinf(data: Dataset, beta, s: float, spec: ProblemSpec) -> WorstCaseReport:
    """Order-infinity worst case: every atom moves by the full radius.

    The sign follows the residual shifted by (2 alpha - 1) times the
    effective radius; a zero argument maps to +1 (both signs achieve the
    same value there, the positive one is the deterministic choice).
    """
    if not math.isinf(spec.p):
        raise DomainError("worst_case_pinf requires p = inf")
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    z = data.residuals(beta, s)
    n = data.n
    weights = np.full(n, 1.0 / n)
    v = _direction(beta, spec.norm)
    radius_1d = spec.epsilon * dual_norm_aug(beta, spec.norm)
    sign = np.where(z + (2.0 * spec.alpha - 1.0) * radius_1d >= 0.0, 1.0, -1.0)
    disp = spec.epsilon * sign[:, None] * v[None, :]
    xs = data.X + disp[:, : data.d]
    ys = data.y + disp[:, data.d]
    return _report(data, beta, s, spec, xs, ys, weights, data.X, data.y)


def worst_case_p_finite(data: Dataset, spec: ProblemSpec, fit: FitResult,
                        residual_warn: float = 1e-4) -> WorstCaseReport:
    """Worst case for finite order above one, built at a fitted solution.

    The upper tail event with mass exactly 1 - alpha is realized by sorting
    residuals and weight-splitting the boundary atom (ties broken by the
    original index).  Tail atoms move up by eps * c^(1-q) * alpha^(q-1),
    the rest move down by eps * c^(1-q) * (1-alpha)^(q-1), both along the
    dual-achieving unit direction.
    """
    if not (1.0 < spec.p < math.inf):
        raise DomainError("worst_case_p_finite requires p in (1, inf)")
    flags = []
    if fit.optimality_residual > residual_warn:
        flags.append("fit-not-optimal")
    beta = fit.beta
    alpha, eps, q = spec.alpha, spec.epsilon, spec.q
    n = data.n
    z = data.residuals(beta, 0.0)  # residuals before the intercept
    # descending split: prefix of mass exactly 1 - alpha forms the tail event
    order = sorted(range(n), key=lambda i: (-z[i], i))
    tail_mass = 1.0 - alpha
    base_w = 1.0 / n
    rows = []           # (original index, weight, in_tail)
    acc = 0.0
    for i in order:
        if acc + base_w <= tail_mass + 1e-15:
            rows.append((i, base_w, True))
            acc += base_w
        elif acc < tail_mass - 1e-15:
            w_tail = tail_mass - acc
            rows.append((i, w_tail, True))
            rows.append((i, base_w - w_tail, False))
            acc = tail_mass
        else:
            rows.append((i, base_w, False))
    c = c_alpha_p(alpha, spec.p)
    t_up = eps * c ** (1.0 - q) * alpha ** (q - 1.0)
    t_dn = eps * c ** (1.0 - q) * (1.0 - alpha) ** (q - 1.0)
    v = _direction(beta, spec.norm)
    xs, ys, ws = [], [], []
    for i, w, in_tail in rows:
        t = t_up if in_tail else -t_dn
        point = np.concatenate([data.X[i], [data.y[i]]]) + t * v
        xs.append(point[: data.d])
        ys.append(point[data.d])
        ws.append(w)
    xs = np.asarray(xs).reshape(len(rows), data.d)
    ys = np.asarray(ys)
    ws = np.asarray(ws)
    base_xs = data.X[[i for i, _, _ in rows]]
    base_ys = data.y[[i for i, _, _ in rows]]
    return _report(data, beta, fit.s_robust, spec, xs, ys, ws, base_xs, base_ys, flags)


def worst_case(data: Dataset, spec: ProblemSpec, fit: FitResult) -> WorstCaseReport:
    """Dispatch on the Wasserstein order; finite p above one uses the fit."""
    if spec.p == 1.0:
        return worst_case_p1(data, fit.beta, fit.s_robust, spec)
    if math.isinf(spec.p):
        return worst_case_pinf(data, fit.beta, fit.s_robust, spec)
    return worst_case_p_finite(data, spec, fit)
