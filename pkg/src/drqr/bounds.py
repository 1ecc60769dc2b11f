"""Radius schedules and generalization-bound arithmetic.

The schedule constant is the theorem's exact plug-in; it is deliberately
conservative (its leading term alone is in the hundreds), so experiment
protocols drive radii with the proportional rule instead.  The out-of-sample
gap integral is evaluated piecewise-exactly against the empirical residual
law.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import c_alpha_p
from .core import DomainError, dual_norm_aug
from .solver import FitResult


@dataclass(frozen=True)
class BoundReport:
    epsilon_N: float
    c_alpha_const: float
    eta: float
    moment_order_m: float
    Gamma: float
    d: int
    N: int


def schedule_constant(eta: float, alpha: float, m: float, Gamma: float, d: int) -> float:
    """Finite-sample constant multiplying log(2N+1)^(1/m) / sqrt(N)."""
    if not (0.0 < eta < 1.0):
        raise DomainError(f"eta must lie in (0, 1), got {eta}")
    if not m > 2.0:
        raise DomainError("needs finite moment of order > 2")
    if not Gamma >= 0.0:
        raise DomainError("moment bound Gamma must be nonnegative")
    if d < 0:
        raise DomainError("dimension must be nonnegative")
    ratio = max(alpha, 1.0 - alpha) / min(alpha, 1.0 - alpha)
    core = (360.0 * math.sqrt(d + 2.0)
            + 2.0 * math.sqrt(2.0 * math.log(3.0 / eta))
            + math.sqrt(3.0 * Gamma / eta) * (32.0 / (m - 2.0))
            * math.sqrt(math.log(24.0 / eta) + 2.0 * (d + 2.0)))
    return ratio * core


def radius_schedule(N: int, eta: float, alpha: float, m: float, Gamma: float,
                    d: int) -> BoundReport:
    """High-confidence radius c * log(2N+1)^(1/m) / sqrt(N) with its constant."""
    if N < 1:
        raise DomainError("N must be >= 1")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    c = schedule_constant(eta, alpha, m, Gamma, d)
    eps = c * math.log(2.0 * N + 1.0) ** (1.0 / m) / math.sqrt(N)
    return BoundReport(epsilon_N=eps, c_alpha_const=c, eta=eta, moment_order_m=m,
                       Gamma=Gamma, d=d, N=N)


def regularized_bound(fit: FitResult, lam: float, alpha: float,
                      schedule: BoundReport) -> float:
    """Upper confidence bound for the regularized fit's out-of-sample risk.

    The bound is the in-sample value plus max(alpha, 1-alpha) times the dual
    norm of the augmented slope times lambda; it is calibrated for
    lam = c(alpha, p) * epsilon_N, which is checked against the schedule and
    warned about (not enforced) on mismatch.
    """
    if fit.spec is not None:
        expected = c_alpha_p(alpha, fit.spec.p) * schedule.epsilon_N
        if abs(lam - expected) > 1e-9 * max(1.0, expected):
            warnings.warn(
                f"lambda {lam:.6g} does not match c * epsilon_N {expected:.6g}; "
                "the confidence calibration does not apply", stacklevel=2)
        norm = fit.spec.norm
    else:
        norm = "l2"
    rho = max(alpha, 1.0 - alpha) * dual_norm_aug(fit.beta, norm)
    return float(fit.objective + rho * lam)


def oos_gap(test_residuals: np.ndarray, delta_s: float, alpha: float) -> float:
    """Integral of (alpha - F(y)) over [0, delta_s] for the empirical law F.

    Positive output means the intercept-shifted predictor has strictly
    smaller expected check loss on this sample.  Requires delta_s >= 0 (the
    below-half quantile case is handled by negating residuals and shift at
    the call site).
    """
    if delta_s < 0.0:
        raise DomainError("delta_s must be >= 0; negate residuals for alpha < 1/2")
    r = np.asarray(test_residuals, dtype=float).ravel()
    if r.size == 0:
        raise DomainError("empty residual sample")
    if delta_s == 0.0:
        return 0.0
    # integral of the empirical cdf: each atom contributes the length of
    # [max(r_i, 0), delta_s] clipped to the window
    cdf_integral = float(np.mean(delta_s - np.clip(r, 0.0, delta_s)))
    return alpha * delta_s - cdf_integral
