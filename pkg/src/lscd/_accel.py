"""Numba JIT plumbing with a pure-NumPy escape hatch.

Hot kernels in :mod:`lscd._kernels` come in two flavours: an ``_nb``-suffixed
loop version compiled with ``numba.njit`` and a ``_np``-suffixed vectorized
NumPy version. Which flavour backs the public kernel names is decided once at
import time: setting the environment variable ``LSCD_DISABLE_NUMBA=1`` (or
failing to import numba) selects the NumPy path.
"""

from __future__ import annotations

import os
import warnings

_TRUTHY = {"1", "true", "yes", "on"}


def _numba_disabled() -> bool:
    return os.environ.get("LSCD_DISABLE_NUMBA", "").strip().lower() in _TRUTHY


NUMBA_ENABLED = False

if not _numba_disabled():
    try:
        from numba import njit  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - exercised only without numba
        warnings.warn(
            "numba is not importable; falling back to pure-NumPy kernels "
            "(set LSCD_DISABLE_NUMBA=1 to silence this warning)",
            RuntimeWarning,
        )

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):
        """No-op stand-in for numba.njit when the JIT path is off."""

        def decorate(func):
            return func

        if args and callable(args[0]) and not kwargs:
            return args[0]
        return decorate


__all__ = ["njit", "NUMBA_ENABLED"]
