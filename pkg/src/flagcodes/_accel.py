"""Numba switch.

Set ``FLAGCODES_NUMBA=0`` to run every hot kernel through its pure-numpy
implementation instead of the jitted loops.
"""
import os

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("FLAGCODES_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return _njit(cache=True, nogil=True)(func)
