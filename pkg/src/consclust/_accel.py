"""Backend selection for the numeric kernels.

Set ``CONSCLUST_BACKEND=numpy`` to force the vectorised numpy fallback.
The default is ``numba`` whenever numba imports cleanly.
"""
import contextlib
import os

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAS_NUMBA = False

_requested = os.environ.get("CONSCLUST_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"CONSCLUST_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numba" if (_requested == "numba" and HAS_NUMBA) else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is present, identity otherwise."""
    if HAS_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def get_backend():
    return BACKEND


def set_backend(name):
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    BACKEND = name


@contextlib.contextmanager
def use_backend(name):
    """Temporarily switch kernel backend (tests and benchmarks)."""
    old = BACKEND
    set_backend(name)
    try:
        yield
    finally:
        set_backend(old)
