"""Optional process parallelism with deterministic, order-preserving results."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence

ENV_VAR = "LAMINATE_FORGE_THREADS"


def thread_count(threads: Optional[int] = None) -> int:
    if threads is None:
        raw = os.environ.get(ENV_VAR, "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    return max(1, threads)


def parallel_map(fn: Callable, items: Sequence, threads: Optional[int] = None) -> List:
    """``list(map(fn, items))``, spread over worker processes when asked.

    Results come back in input order, so output never depends on scheduling.
    """
    t = thread_count(threads)
    if t == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(t, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * t))))
