"""Pure-numpy subgradient kernel, the fallback when the compiled extension
is unavailable.  Must mirror the arithmetic of ``_speedups.pyx`` step for
step; the two are benchmarked against each other in ``benchmarks/``.
"""

from __future__ import annotations

import math

import numpy as np

# norm codes shared with the compiled kernel
NORM_L1, NORM_L2, NORM_LINF = 0, 1, 2


def penalty_value(beta: np.ndarray, norm_code: int) -> float:
    """Dual norm of (beta, -1) for the three supported transport norms."""
    if norm_code == NORM_L1:
        m = float(np.max(np.abs(beta))) if beta.size else 0.0
        return max(m, 1.0)
    if norm_code == NORM_L2:
        return math.sqrt(float(beta @ beta) + 1.0)
    return float(np.sum(np.abs(beta))) + 1.0


def penalty_subgradient(beta: np.ndarray, norm_code: int) -> np.ndarray:
    if norm_code == NORM_L1:
        g = np.zeros_like(beta)
        if beta.size:
            m = float(np.max(np.abs(beta)))
            if m > 1.0:
                j = int(np.argmax(np.abs(beta)))
                g[j] = 1.0 if beta[j] > 0 else -1.0
        return g
    if norm_code == NORM_L2:
        return beta / math.sqrt(float(beta @ beta) + 1.0)
    return np.sign(beta)


def subgradient_chunk(X, y, alpha, lam, norm_code, beta, s,
                      n_iters, k_offset, delta0,
                      f_best, beta_best, s_best):
    """Run ``n_iters`` Polyak-style subgradient steps; track the best iterate.

    Returns (beta, s, f_best, beta_best, s_best, f_last).
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    beta = np.array(beta, dtype=float, copy=True)
    beta_best = np.array(beta_best, dtype=float, copy=True)
    n = y.shape[0]
    f_last = f_best
    for k in range(n_iters):
        r = y - X @ beta - s
        pos = r >= 0.0
        loss = float(np.sum(np.where(pos, alpha * r, (alpha - 1.0) * r))) / n
        f = loss + lam * penalty_value(beta, norm_code)
        f_last = f
        if f < f_best:
            f_best = f
            beta_best[:] = beta
            s_best = s
        w = np.where(pos, alpha, alpha - 1.0)
        g_s = -float(np.sum(w)) / n
        g_beta = -(X.T @ w) / n + lam * penalty_subgradient(beta, norm_code)
        gn2 = float(g_beta @ g_beta) + g_s * g_s
        delta_k = delta0 / math.sqrt(k_offset + k + 1.0)
        step = (f - f_best + delta_k) / max(gn2, 1e-300)
        beta -= step * g_beta
        s -= step * g_s
    return beta, s, f_best, beta_best, s_best, f_last
