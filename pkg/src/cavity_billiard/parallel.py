import os


def max_workers() -> int:
    """Thread cap from ``CAVITY_BILLIARD_THREADS`` (default: CPU count)."""
    raw = os.environ.get("CAVITY_BILLIARD_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1
