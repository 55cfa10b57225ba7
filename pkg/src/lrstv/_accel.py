"""Optional numba acceleration.

Set ``LRSTV_DISABLE_NUMBA=1`` to force the pure-numpy code paths. The flag is
read once at import time.
"""
import os

_FALSY = ("", "0", "false", "no", "off")

DISABLED_BY_ENV = os.environ.get("LRSTV_DISABLE_NUMBA", "").strip().lower() not in _FALSY

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not DISABLED_BY_ENV


def njit(func):
    """Compile ``func`` with numba when available, otherwise return it as-is."""
    if HAS_NUMBA:
        return numba.njit(cache=True, fastmath=False)(func)
    return func
