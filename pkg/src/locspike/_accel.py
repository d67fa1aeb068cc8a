"""Backend selection for the hot scan loops.

Set ``LOCSPIKE_DISABLE_NUMBA=1`` to force the pure-numpy path. When numba is
not importable the numpy path is used regardless of the flag.
"""
import os

_FLAG = "LOCSPIKE_DISABLE_NUMBA"


def _env_disabled():
    return os.environ.get(_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


try:
    if _env_disabled():
        raise ImportError("numba disabled by " + _FLAG)
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # bare @njit and @njit(...) both become no-ops
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrapper(f):
            return f

        return wrapper


def backend_name():
    return "numba" if HAVE_NUMBA else "numpy"
