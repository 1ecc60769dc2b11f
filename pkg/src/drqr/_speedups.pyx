# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled subgradient kernel; arithmetic mirrors ``_kernel_py.py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

DEF NORM_L1 = 0
DEF NORM_L2 = 1
DEF NORM_LINF = 2


cdef double _penalty(double[::1] beta, int norm_code) noexcept nogil:
    cdef Py_ssize_t j, d = beta.shape[0]
    cdef double m = 0.0, acc = 0.0
    if norm_code == NORM_L1:
        for j in range(d):
            if fabs(beta[j]) > m:
                m = fabs(beta[j])
        return m if m > 1.0 else 1.0
    elif norm_code == NORM_L2:
        for j in range(d):
            acc += beta[j] * beta[j]
        return sqrt(acc + 1.0)
    else:
        for j in range(d):
            acc += fabs(beta[j])
        return acc + 1.0


cdef void _penalty_subgrad(double[::1] beta, int norm_code, double[::1] out) noexcept nogil:
    cdef Py_ssize_t j, jmax = 0, d = beta.shape[0]
    cdef double m = 0.0, t
    for j in range(d):
        out[j] = 0.0
    if norm_code == NORM_L1:
        if d == 0:
            return
        for j in range(d):
            if fabs(beta[j]) > m:
                m = fabs(beta[j])
                jmax = j
        if m > 1.0:
            out[jmax] = 1.0 if beta[jmax] > 0 else -1.0
    elif norm_code == NORM_L2:
        t = 0.0
        for j in range(d):
            t += beta[j] * beta[j]
        t = sqrt(t + 1.0)
        for j in range(d):
            out[j] = beta[j] / t
    else:
        for j in range(d):
            if beta[j] > 0:
                out[j] = 1.0
            elif beta[j] < 0:
                out[j] = -1.0


def subgradient_chunk(double[:, ::1] X, double[::1] y, double alpha, double lam,
                      int norm_code, object beta_in, double s,
                      Py_ssize_t n_iters, double k_offset, double delta0,
                      double f_best, object beta_best_in, double s_best):
    """Run ``n_iters`` Polyak-style subgradient steps; track the best iterate.

    Returns (beta, s, f_best, beta_best, s_best, f_last).
    """
    cdef cnp.ndarray[double, ndim=1] beta_arr = np.array(beta_in, dtype=np.float64, copy=True)
    cdef cnp.ndarray[double, ndim=1] best_arr = np.array(beta_best_in, dtype=np.float64, copy=True)
    cdef double[::1] beta = beta_arr
    cdef double[::1] beta_best = best_arr
    cdef Py_ssize_t n = y.shape[0], d = X.shape[1]
    cdef cnp.ndarray[double, ndim=1] gb_arr = np.zeros(d, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] pg_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] g_beta = gb_arr
    cdef double[::1] pg = pg_arr
    cdef Py_ssize_t i, j, k
    cdef double r, loss, f, w, g_s, gn2, delta_k, step, pred, f_last

    f_last = f_best
    with nogil:
        for k in range(n_iters):
            loss = 0.0
            g_s = 0.0
            for j in range(d):
                g_beta[j] = 0.0
            for i in range(n):
                pred = s
                for j in range(d):
                    pred += X[i, j] * beta[j]
                r = y[i] - pred
                if r >= 0.0:
                    loss += alpha * r
                    w = alpha
                else:
                    loss += (alpha - 1.0) * r
                    w = alpha - 1.0
                g_s -= w
                for j in range(d):
                    g_beta[j] -= w * X[i, j]
            loss /= n
            g_s /= n
            for j in range(d):
                g_beta[j] /= n
            f = loss + lam * _penalty(beta, norm_code)
            f_last = f
            if f < f_best:
                f_best = f
                s_best = s
                for j in range(d):
                    beta_best[j] = beta[j]
            _penalty_subgrad(beta, norm_code, pg)
            gn2 = g_s * g_s
            for j in range(d):
                g_beta[j] += lam * pg[j]
                gn2 += g_beta[j] * g_beta[j]
            delta_k = delta0 / sqrt(k_offset + k + 1.0)
            if gn2 < 1e-300:
                gn2 = 1e-300
            step = (f - f_best + delta_k) / gn2
            for j in range(d):
                beta[j] -= step * g_beta[j]
            s -= step * g_s
    return beta_arr, s, f_best, best_arr, s_best, f_last
