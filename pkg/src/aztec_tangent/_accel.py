"""Optional numba acceleration.

Set ``AZTEC_TANGENT_NO_NUMBA=1`` to run the interpreted kernels instead.
"""
import os

DISABLE_ENV = "AZTEC_TANGENT_NO_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def numba_disabled() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() not in ("", "0", "false", "no")


HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not numba_disabled()


def jit(fn):
    """Compile with numba when enabled; otherwise return ``fn`` unchanged."""
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn
