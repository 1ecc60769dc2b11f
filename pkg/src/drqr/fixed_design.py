"""Regress-then-robustify pipeline for predetermined designs.

Slopes come from ordinary least squares; the robust location problem is then
one-dimensional over the adjusted residuals, where the reformulation
penalty is a pure constant (no coefficient norm) and the intercept shift
loses its dual-norm factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import radius_schedule
from .constants import c_alpha_p, intercept_shift
from .core import Dataset, DomainError, ProblemSpec, alpha_quantile, mean_check_loss

_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class FixedDesignFit:
    beta_ols: np.ndarray
    residuals_z: np.ndarray
    s_bar: float
    s_robust: float
    hat_diagonals: np.ndarray
    target_c: np.ndarray
    objective: float


@dataclass(frozen=True)
class FixedDesignRadii:
    eps1: float
    eps2: float
    eps3: float
    eta: float
    Gamma0: float
    total: float


def ols_fit(data: Dataset):
    """Least squares by thin QR; returns (beta, residuals, hat diagonals).

    Rank deficiency (a factor diagonal below 1e-10 of the largest) is an
    error: the pipeline requires a full-rank design.
    """
    X, y = data.X, data.y
    if data.d == 0:
        return np.zeros(0), y.copy(), np.zeros(data.n)
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    if diag.size and float(np.min(diag)) < _RANK_RTOL * float(np.max(diag)):
        raise DomainError("design matrix is rank deficient")
    beta = np.linalg.solve(R, Q.T @ y)
    residuals = y - X @ beta
    hat = np.sum(Q * Q, axis=1)
    return beta, residuals, hat


def gamma0_moment(z: np.ndarray, m: float) -> float:
    """Plug-in m-th absolute moment of the residual sample."""
    z = np.asarray(z, dtype=float).ravel()
    return float(np.mean(np.abs(z) ** m))


def fixed_design_dro(data: Dataset, spec: ProblemSpec, target_c) -> FixedDesignFit:
    """OLS slopes, then the robust one-dimensional quantile of the residuals.

    The regularized location is the left-continuous empirical quantile of
    the adjusted residuals; the robust location adds the radius-dependent
    shift (without any dual-norm factor, the residual problem being scalar).
    The reported objective is the reformulation value: quantile loss plus
    the penalty constant times the radius.
    """
    target_c = np.atleast_1d(np.asarray(target_c, dtype=float))
    if target_c.shape[0] != data.d:
        raise DomainError(f"target feature vector has length {target_c.shape[0]}, "
                          f"expected {data.d}")
    beta, z, hat = ols_fit(data)
    s_bar = alpha_quantile(z, spec.alpha)
    shift = intercept_shift(spec.alpha, spec.p, spec.epsilon, 1.0)
    objective = mean_check_loss(z - s_bar, spec.alpha) + c_alpha_p(spec.alpha, spec.p) * spec.epsilon
    return FixedDesignFit(beta_ols=beta, residuals_z=z, s_bar=float(s_bar),
                          s_robust=float(s_bar + shift), hat_diagonals=hat,
                          target_c=target_c, objective=float(objective))


def fixed_design_radii(data: Dataset, eta: float, alpha: float, m: float,
                       Gamma0_est: float, target_c, N: int | None = None) -> FixedDesignRadii:
    """Three-part radius: schedule term at eta/3 plus the two design terms.

    The first part reuses the random-design schedule with the residual
    moment bound; the second scales like sqrt(d/N); the third uses the exact
    design through c' (X'X)^{-1} c.
    """
    if not m > 2.0:
        raise DomainError("needs finite moment of order > 2")
    if not Gamma0_est >= 0.0:
        raise DomainError("Gamma0 must be nonnegative")
    if not (0.0 < eta < 1.0):
        raise DomainError(f"eta must lie in (0, 1), got {eta}")
    target_c = np.atleast_1d(np.asarray(target_c, dtype=float))
    if target_c.shape[0] != data.d:
        raise DomainError("target feature vector does not match the design")
    n = data.n if N is None else int(N)
    eps1 = radius_schedule(n, eta / 3.0, alpha, m, Gamma0_est, data.d).epsilon_N
    eps2 = 3.0 * Gamma0_est ** (1.0 / m) * math.sqrt(data.d / n) / eta
    G = data.X.T @ data.X
    quad = float(target_c @ np.linalg.solve(G, target_c)) if data.d else 0.0
    eps3 = Gamma0_est ** (1.0 / m) * math.sqrt(3.0 * quad / eta)
    ratio = max(alpha, 1.0 - alpha) / min(alpha, 1.0 - alpha)
    total = eps1 + ratio * (eps2 + eps3)
    return FixedDesignRadii(eps1=float(eps1), eps2=float(eps2), eps3=float(eps3),
                            eta=eta, Gamma0=float(Gamma0_est), total=float(total))
