"""Worker-count policy.

The FISURF_THREADS environment variable caps worker parallelism for the
operations that chunk work (cell extrema sampling, box counting over
scales). 0 or unset means auto (one worker per CPU). Results are
deterministic regardless of the worker count: every chunk is reduced in
input order.
"""
import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "FISURF_THREADS"


def thread_count() -> int:
    raw = os.environ.get(ENV_VAR, "0")
    try:
        requested = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}")
    if requested < 0:
        raise ValueError(f"{ENV_VAR} must be >= 0, got {requested}")
    if requested == 0:
        return os.cpu_count() or 1
    return requested


def ordered_map(fn, items):
    """Map fn over items, preserving order; threaded when allowed."""
    items = list(items)
    workers = min(thread_count(), len(items)) if items else 1
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
