"""Backend selection for the compiled kernels.

Set ``KVN_DISABLE_NUMBA=1`` to force the pure-numpy code paths. If numba
cannot be imported the numpy paths are used unconditionally.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

BACKENDS = ("numba", "numpy")


def numba_available():
    return numba is not None


def default_backend():
    """Backend used when callers pass ``backend=None``; read on every call."""
    flag = os.environ.get("KVN_DISABLE_NUMBA", "").strip().lower()
    if numba is None or flag in ("1", "true", "yes", "on"):
        return "numpy"
    return "numba"


def resolve_backend(backend):
    if backend is None:
        return default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend == "numba" and numba is None:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    return numba.njit(*args, **kwargs)
