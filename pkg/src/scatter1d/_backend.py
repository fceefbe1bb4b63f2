"""Kernel backend selection.

The propagation kernels exist twice: numba-jitted per-energy loops in
`_kernels_nb` and energy-vectorized numpy versions in `_kernels_np`.
`SCATTER1D_BACKEND=numpy` forces the numpy path; the default is numba
when importable, numpy otherwise. `benchmarks/bench_kernels.py` compares
the two.
"""
from __future__ import annotations

import os
import warnings

_REQUESTED = os.environ.get("SCATTER1D_BACKEND", "").strip().lower()


def _numba_usable() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


if _REQUESTED == "numpy":
    USE_NUMBA = False
elif _REQUESTED in ("", "numba"):
    USE_NUMBA = _numba_usable()
    if _REQUESTED == "numba" and not USE_NUMBA:
        warnings.warn("numba requested but not importable; using numpy kernels")
else:
    raise ValueError(
        f"SCATTER1D_BACKEND={_REQUESTED!r} not understood (use 'numba' or 'numpy')")


def active_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def get_kernels():
    """Return the active kernel module."""
    if USE_NUMBA:
        from . import _kernels_nb
        return _kernels_nb
    from . import _kernels_np
    return _kernels_np
