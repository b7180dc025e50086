"""Kernel backend selection.

The per-event clock updates are the hot path, so the scan kernels are
compiled with numba when it is available.  Setting PREDRACE_BACKEND=python
forces the plain interpreted path (same source, no JIT), which is what the
backend benchmark compares against.
"""

import os
import warnings

_requested = os.environ.get("PREDRACE_BACKEND", "numba").strip().lower()

if _requested not in ("numba", "python"):
    raise ValueError(f"PREDRACE_BACKEND must be 'numba' or 'python', got {_requested!r}")

BACKEND = _requested

if BACKEND == "numba":
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay runnable
        warnings.warn("numba unavailable; falling back to the python backend")
        BACKEND = "python"


def jit(func):
    """Compile ``func`` with numba, or return it unchanged under the python backend."""
    if BACKEND == "numba":
        return _njit(cache=True)(func)
    return func
