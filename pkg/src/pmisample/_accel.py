"""Numba switch.

Set ``PMISAMPLE_DISABLE_NUMBA=1`` to run every kernel through its pure-numpy
implementation. The flag is read once, at import time.
"""

import os

_FLAG = os.environ.get("PMISAMPLE_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and not DISABLED

NUMBA_OPTS = {"cache": True, "nogil": True}


def njit(func):
    """Compile ``func`` with numba when available, else return it untouched."""
    if numba is None:
        return func
    return numba.njit(func, **NUMBA_OPTS)

