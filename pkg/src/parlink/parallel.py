"""Thread-count resolution and tiled work scheduling.

Worker threads run numba kernels that release the GIL, so a plain thread
pool gives real parallelism. Determinism never depends on scheduling:
every merge step commutes.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV_VAR = "PARLINK_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Effective worker count: explicit argument, then env var, then cpu count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV_VAR)
        if env is not None:
            threads = int(env)
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


def block_ranges(total: int, block: int) -> list[tuple[int, int]]:
    """Split [0, total) into half-open ranges of at most `block` items."""
    if block < 1:
        raise ValueError(f"block size must be >= 1, got {block}")
    return [(start, min(start + block, total)) for start in range(0, total, block)]


def run_tasks(fn, items, threads: int) -> None:
    """Run fn over items, in the calling thread or on a worker pool.

    Exceptions propagate to the caller either way.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        for item in items:
            fn(item)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for _ in pool.map(fn, items):
            pass
