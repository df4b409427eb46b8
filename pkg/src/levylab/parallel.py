"""Thread-pool helpers honoring the LEVYLAB_THREADS environment variable.

All call sites submit pure functions over an ordered list of work items and
consume results in input order, so the outcome is independent of the worker
count. LEVYLAB_THREADS caps the pool size; 0 (or unset) means automatic.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "LEVYLAB_THREADS"
_AUTO_CAP = 8


def worker_count() -> int:
    """Resolve the effective worker count from the environment."""
    raw = os.environ.get(ENV_VAR, "").strip()
    if raw in ("", "0"):
        return min(_AUTO_CAP, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_VAR} must be a nonnegative integer, got {raw!r}") from exc
    if value < 0:
        raise ValueError(f"{ENV_VAR} must be a nonnegative integer, got {value}")
    return value


def parallel_map(fn, items):
    """Map ``fn`` over ``items``, preserving order.

    Runs serially when one worker is configured; otherwise dispatches to a
    thread pool. Results are identical either way.
    """
    items = list(items)
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
