"""JIT switch for the numeric kernels.

Set ``PRIME_LDP_DISABLE_NUMBA=1`` to force the pure-numpy code paths, e.g. when
debugging or when numba is unavailable on a platform.
"""

import os

_FLAG = os.environ.get("PRIME_LDP_DISABLE_NUMBA", "").strip().lower()

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if _njit is not None:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
