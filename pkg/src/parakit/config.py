"""Process-wide knobs read from the environment."""

import os


def thread_count():
    """Worker count for parallelizable loops (PARAKIT_THREADS, default 1)."""
    try:
        return max(1, int(os.environ.get("PARAKIT_THREADS", "1")))
    except ValueError:
        return 1


def force_fallback():
    """True when PARAKIT_FORCE_FALLBACK demands the numpy kernels."""
    return os.environ.get("PARAKIT_FORCE_FALLBACK", "").lower() in (
        "1",
        "true",
        "yes",
    )
