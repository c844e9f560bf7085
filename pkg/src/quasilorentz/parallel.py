"""Index-chunked process parallelism with order-preserving results."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def default_workers() -> int:
    return os.cpu_count() or 1


def chunk_bounds(n: int, workers: int, per_worker: int = 4) -> list[tuple[int, int]]:
    if n <= 0:
        return []
    k = max(1, min(n, workers * per_worker))
    step = -(-n // k)
    return [(a, min(a + step, n)) for a in range(0, n, step)]


def run_chunks(func, n: int, workers: int | None, *args):
    """Call func(start, stop, *args) over index chunks; results in index order."""
    workers = default_workers() if workers is None else max(1, int(workers))
    bounds = chunk_bounds(n, workers)
    if workers == 1 or len(bounds) <= 1:
        return [func(a, b, *args) for a, b in bounds]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(func, a, b, *args) for a, b in bounds]
        return [f.result() for f in futs]
