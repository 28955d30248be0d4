"""Deterministic fan-out over independent evaluations."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_cap() -> int:
    """Worker count from ``QDSFLUCT_THREADS`` (default: all cores)."""
    raw = os.environ.get("QDSFLUCT_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def ordered_map(fn, items, workers: int | None = None) -> list:
    """``[fn(x) for x in items]``; results always come back in input order."""
    items = list(items)
    n = thread_cap() if workers is None else max(1, workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
