"""Optional numba acceleration.

Set ``DDSC_DISABLE_NUMBA=1`` to force the pure-numpy code paths.  When numba
is missing the same fallback is used silently.
"""

import os

_DISABLED = os.environ.get("DDSC_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("numba disabled by DDSC_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # bare @njit or @njit(...)
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def _identity(fn):
            return fn

        return _identity


BACKEND = "numba" if HAVE_NUMBA else "numpy"
