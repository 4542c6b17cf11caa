"""JIT switch for the numeric kernels.

Kernels are written in the numba-compatible subset of Python and decorated
with :func:`njit`.  Setting ``CLOVEN_DISABLE_JIT=1`` (or running without numba
installed) leaves them as plain Python functions operating on numpy arrays,
which is slow but gives an independent execution path for testing and
benchmarking.
"""

from __future__ import annotations

import os
import warnings

__all__ = ["njit", "JIT_ENABLED", "PerformanceWarning"]


class PerformanceWarning(UserWarning):
    pass


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


JIT_ENABLED = not _flag("CLOVEN_DISABLE_JIT")

if JIT_ENABLED:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a hard dependency
        warnings.warn(
            "numba is not available; kernels run as plain Python",
            PerformanceWarning,
        )
        JIT_ENABLED = False

if JIT_ENABLED:

    def njit(func):
        return numba.njit(cache=True, nogil=True)(func)

else:

    def njit(func):
        return func
