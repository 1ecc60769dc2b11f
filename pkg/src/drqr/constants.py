"""Closed-form scalar constants: the penalty coefficient, the dual-search
constants, the optimal dual multiplier and the robust intercept shift.

All functions are pure scalar maps of (alpha, p) plus a radius where needed.
For p extremely close to 1 the conjugate q exceeds what direct powers of
alpha can survive in double precision, so those branches switch to log-space
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import DomainError

# q above this threshold: alpha**q can underflow, use log-space formulas
_LOG_SPACE_Q = 700.0


def _validate_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _conjugate(p: float) -> float:
    if math.isinf(p):
        return 1.0
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


def c_alpha_p(alpha: float, p: float) -> float:
    """Penalty coefficient multiplying radius * dual norm in the reformulation.

    Three branches: max(alpha, 1-alpha) at p = 1, the q-mean expression for
    finite p > 1 and 2*alpha*(1-alpha) at p = inf.
    """
    alpha = _validate_alpha(alpha)
    p = float(p)
    if not p >= 1.0:
        raise DomainError(f"p must be >= 1, got {p}")
    if p == 1.0:
        return max(alpha, 1.0 - alpha)
    if math.isinf(p):
        return 2.0 * alpha * (1.0 - alpha)
    q = _conjugate(p)
    la, lb = math.log(alpha), math.log(1.0 - alpha)
    if q > _LOG_SPACE_Q:
        # exp((1/q) * logsumexp(q*log(a) + log(b), q*log(b) + log(a)))
        t1 = q * la + lb
        t2 = q * lb + la
        hi = max(t1, t2)
        return math.exp((hi + math.log1p(math.exp(min(t1, t2) - hi))) / q)
    return (alpha ** q * (1.0 - alpha) + alpha * (1.0 - alpha) ** q) ** (1.0 / q)


def k_constants(alpha: float, p: float) -> tuple[float, float]:
    """Constants (k1, k2) of the one-dimensional dual objective, p in (1, inf)."""
    alpha = _validate_alpha(alpha)
    p = float(p)
    if not (1.0 < p < math.inf):
        raise DomainError(f"k constants are defined for p in (1, inf) only, got {p}")
    q = _conjugate(p)
    scale = (p - 1.0) / p ** q
    k1 = scale * (alpha ** q * (1.0 - alpha) + alpha * (1.0 - alpha) ** q)
    k2 = scale * (alpha ** q - (1.0 - alpha) ** q)
    return float(k1), float(k2)


def lambda_star(alpha: float, p: float, radius_1d: float) -> float:
    """Minimizer of lam * radius**p + k1 * lam**(1-q) over lam > 0.

    ``radius_1d`` is the effective one-dimensional radius, i.e. the ambiguity
    radius scaled by the dual norm of the augmented coefficient.
    """
    p = float(p)
    if not (1.0 < p < math.inf):
        raise DomainError(f"lambda_star is defined for p in (1, inf) only, got {p}")
    radius_1d = float(radius_1d)
    if not radius_1d > 0.0:
        raise DomainError("unregularized: dual multiplier diverges at zero radius")
    q = _conjugate(p)
    k1, _ = k_constants(alpha, p)
    return float(((q - 1.0) * k1) ** (1.0 / q) / radius_1d ** (p / q))


def intercept_shift(alpha: float, p: float, epsilon: float,
                    dual_norm_beta_bar: float) -> float:
    """Difference between the robust and the regularized intercept.

    Zero at p = 1; for p in (1, inf] equal to
    (eps / q) * (alpha^q - (1-alpha)^q) * c^(1-q) * ||(beta, -1)||_* with the
    convention q = 1 at p = inf.  Sign follows sign(alpha - 1/2).
    """
    alpha = _validate_alpha(alpha)
    p = float(p)
    if not p >= 1.0:
        raise DomainError(f"p must be >= 1, got {p}")
    epsilon = float(epsilon)
    if not (epsilon >= 0.0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon must be finite and >= 0, got {epsilon}")
    if not (math.isfinite(dual_norm_beta_bar) and dual_norm_beta_bar >= 0.0):
        raise DomainError("dual norm must be finite and nonnegative")
    if p == 1.0 or epsilon == 0.0:
        return 0.0
    if math.isinf(p):
        return (2.0 * alpha - 1.0) * epsilon * dual_norm_beta_bar
    q = _conjugate(p)
    c = c_alpha_p(alpha, p)
    if q > _LOG_SPACE_Q:
        if alpha == 0.5:
            return 0.0
        a, b = max(alpha, 1.0 - alpha), min(alpha, 1.0 - alpha)
        # |alpha^q - (1-alpha)^q| * c^(1-q) = exp(q*log a + (1-q)*log c) * (1 - (b/a)^q)
        core = math.exp(q * math.log(a) + (1.0 - q) * math.log(c))
        core *= -math.expm1(q * (math.log(b) - math.log(a)))
        signed = math.copysign(core, alpha - 0.5)
    else:
        signed = (alpha ** q - (1.0 - alpha) ** q) * c ** (1.0 - q)
    return epsilon / q * signed * dual_norm_beta_bar


@dataclass(frozen=True)
class RobustConstants:
    """Bundle of the dimensionless constants for one (alpha, p) pair."""

    c_alpha_p: float
    k1: float
    k2: float

    @classmethod
    def for_problem(cls, alpha: float, p: float) -> "RobustConstants":
        c = c_alpha_p(alpha, p)
        if 1.0 < p < math.inf:
            k1, k2 = k_constants(alpha, p)
        else:
            k1, k2 = math.nan, math.nan
        return cls(c, k1, k2)
