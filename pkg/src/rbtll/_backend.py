"""Kernel backend selection.

Hot loops are compiled with numba unless ``RBTLL_DISABLE_NUMBA`` is set to a
truthy value (or numba cannot be imported), in which case the vectorised numpy
implementations are used instead.
"""
import os

_FALSY = ("", "0", "false", "no", "off")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

USE_NUMBA = numba is not None and os.environ.get("RBTLL_DISABLE_NUMBA", "").strip().lower() in _FALSY

BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(fn=None, **kwargs):
    """``numba.njit`` when available, otherwise the identity decorator."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)

    def wrap(f):
        if numba is None:
            return f
        return numba.njit(**kwargs)(f)

    if fn is None:
        return wrap
    return wrap(fn)
