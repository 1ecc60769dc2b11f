"""Kernel dispatch: prefer the compiled extension, fall back to numpy.

Set ``DRQR_PURE=1`` in the environment to force the pure-Python kernel
(useful for benchmarking and for debugging the compiled twin).
"""

from __future__ import annotations

import os

from . import _kernel_py

NORM_CODES = {"l1": _kernel_py.NORM_L1, "l2": _kernel_py.NORM_L2, "linf": _kernel_py.NORM_LINF}

_force_pure = os.environ.get("DRQR_PURE", "").strip() not in ("", "0")

if not _force_pure:
    try:
        from . import _speedups  # type: ignore[attr-defined]
    except ImportError:
        _speedups = None
else:
    _speedups = None

if _speedups is not None:
    BACKEND = "compiled"
    subgradient_chunk = _speedups.subgradient_chunk
else:
    BACKEND = "python"
    subgradient_chunk = _kernel_py.subgradient_chunk

# beyond this many matrix entries the BLAS-backed fallback overtakes the
# scalar compiled loop (see benchmarks/bench_kernels.py)
_SIZE_CROSSOVER = 60_000


def select_kernel(n: int, d: int):
    """Fastest available kernel for an n-by-d problem."""
    if _speedups is not None and n * max(d, 1) <= _SIZE_CROSSOVER:
        return _speedups.subgradient_chunk
    return _kernel_py.subgradient_chunk


penalty_value = _kernel_py.penalty_value
penalty_subgradient = _kernel_py.penalty_subgradient
