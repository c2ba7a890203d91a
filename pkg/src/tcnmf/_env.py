"""Process-level switches read from the environment.

``RNMF_THREADS``        worker cap for the parallel column kernels (0 or unset = auto).
``RNMF_DISABLE_NUMBA``  when truthy, use the pure-numpy kernels even if numba imports.

Both must be settled before numba is imported, because numba sizes its
thread pool from ``NUMBA_NUM_THREADS`` at import time.
"""

import os


def _flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


def requested_threads():
    raw = os.environ.get("RNMF_THREADS", "").strip()
    if not raw:
        return 0
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"RNMF_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValueError(f"RNMF_THREADS must be >= 0, got {value}")
    return value


THREADS = requested_threads()
if THREADS > 0:
    # allow oversubscription on small machines so RNMF_THREADS=4 is honoured
    os.environ.setdefault("NUMBA_NUM_THREADS", str(THREADS))

NUMBA_DISABLED = _flag("RNMF_DISABLE_NUMBA")
