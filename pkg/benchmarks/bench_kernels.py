#!/usr/bin/env python3
"""Benchmark the compiled subgradient kernel against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--iters 4000]
"""

import argparse
import time

import numpy as np

from drqr import _kernel_py

try:
    from drqr import _speedups
except ImportError:
    _speedups = None


def bench(fn, X, y, beta0, iters, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(X, y, 0.9, 0.05, 1, beta0, 0.0, iters, 0.0, 0.05,
           np.inf, beta0, 0.0)
        best = min(best, time.perf_counter() - t0)
    return iters / best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--iters", type=int, default=4000)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'size':>14} {'python it/s':>14} {'compiled it/s':>14} {'speedup':>9}")
    for n, d in [(50, 30), (200, 30), (1000, 10), (4000, 30)]:
        X = rng.normal(size=(n, d))
        y = X @ rng.uniform(1, 5, d) + 5 * rng.normal(size=n)
        beta0 = np.zeros(d)
        py_rate = bench(_kernel_py.subgradient_chunk, X, y, beta0, args.iters)
        if _speedups is not None:
            cy_rate = bench(_speedups.subgradient_chunk, X, y, beta0, args.iters)
            print(f"{f'{n}x{d}':>14} {py_rate:>14.0f} {cy_rate:>14.0f} "
                  f"{cy_rate / py_rate:>8.1f}x")
        else:
            print(f"{f'{n}x{d}':>14} {py_rate:>14.0f} {'(not built)':>14} {'-':>9}")


if __name__ == "__main__":
    main()
