"""Optional numba acceleration.

Kernels are compiled with numba when it is importable, unless the
environment variable ``QFRAME_DISABLE_NUMBA`` is set to a true value
(``1``, ``true``, ``yes``). The flag is read once, at import time.
"""
import os

_FLAG = os.environ.get("QFRAME_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional extra
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _FLAG

