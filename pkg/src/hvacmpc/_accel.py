"""Numba acceleration switch.

Hot kernels ship in two variants: an njit-compiled one and a pure-numpy
fallback. Set HVACMPC_NO_NUMBA=1 to force the fallback (also used when numba
is not importable). The benchmark script compares both paths.
"""

from __future__ import annotations

import os


def numba_enabled() -> bool:
    if os.environ.get("HVACMPC_NO_NUMBA", "0") not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = numba_enabled()

if NUMBA_ENABLED:
    from numba import njit
else:
    def njit(*args, **kwargs):
        """No-op decorator standing in for numba.njit."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func
        return wrap
