"""Backend selection for the numeric kernels.

Set ``QTELEPORT_DISABLE_NUMBA=1`` before import to force the pure-numpy path.
"""
from __future__ import annotations

import os

DISABLE_ENV = "QTELEPORT_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _disabled_by_env() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and not _disabled_by_env()


def njit(func):
    """Compile ``func`` with numba when it is installed, else return it unchanged.

    Compilation happens regardless of ``USE_NUMBA`` so benchmarks can compare
    both paths in one process; ``USE_NUMBA`` only decides which one is exported.
    """
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
