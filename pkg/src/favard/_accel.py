"""Backend switch for the hot kernels.

Every kernel in :mod:`favard.kernels` exists twice: a numba ``@njit`` version
and a vectorised numpy version.  ``FAVARD_BACKEND=numpy`` forces the numpy
path; anything else uses numba when it imports cleanly.
"""
from __future__ import annotations

import contextlib
import os

BACKEND_ENV = "FAVARD_BACKEND"

try:
    import numba

    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is too old and numba warns on every first launch
        numba.config.THREADING_LAYER = "omp"
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False


def _initial_backend() -> str:
    wanted = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if wanted == "numpy" or not HAVE_NUMBA:
        return "numpy"
    return "numba"


_backend = _initial_backend()


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    _backend = name


@contextlib.contextmanager
def use_backend(name: str):
    prev = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` or a no-op decorator without numba."""
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


prange = numba.prange if HAVE_NUMBA else range


def thread_count() -> int:
    return numba.get_num_threads() if HAVE_NUMBA else 1


def set_threads(count: int | None) -> None:
    if HAVE_NUMBA and count:
        numba.set_num_threads(min(int(count), numba.config.NUMBA_NUM_THREADS))
