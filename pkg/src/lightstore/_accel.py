"""Numba switch.

Hot loops are written twice: a scalar-loop version compiled with numba and a
vectorised numpy version.  ``LIGHTSTORE_DISABLE_NUMBA=1`` (read at import)
forces the numpy path; tests flip :data:`NUMBA_ENABLED` directly.
"""

from __future__ import annotations

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_DISABLED = os.environ.get("LIGHTSTORE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

NUMBA_ENABLED = HAVE_NUMBA and not _DISABLED


def njit(func):
    """Compile ``func`` in nopython mode if numba is importable, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
