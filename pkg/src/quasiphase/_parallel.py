"""Thread-count policy shared by the parallel code paths."""

import os

ENV_VAR = "QUASIPHASE_THREADS"


def max_workers() -> int:
    """Worker cap from ``QUASIPHASE_THREADS`` (default: CPU count, at least 1)."""
    raw = os.environ.get(ENV_VAR, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
        return n
    return max(1, os.cpu_count() or 1)
