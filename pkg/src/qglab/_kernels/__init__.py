"""Dual-path numeric kernels.

Hot inner loops are compiled with numba's ``@njit`` when available.  Setting
the environment variable ``QGLAB_DISABLE_NUMBA=1`` (before import) selects a
pure-numpy fallback path instead; both paths implement the same algorithms
and are compared in ``benchmarks/bench_kernels.py``.
"""

import os


def _numba_enabled() -> bool:
    flag = os.environ.get("QGLAB_DISABLE_NUMBA", "").strip().lower()
    if flag in {"1", "true", "yes", "on"}:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:  # pragma: no cover - numba is a declared dependency
        return False
    return True


NUMBA_ENABLED = _numba_enabled()


def maybe_njit(func):
    """Return ``njit(cache=True)(func)`` when numba is enabled, else ``func``."""
    if NUMBA_ENABLED:
        from numba import njit

        return njit(cache=True)(func)
    return func
