"""Deterministic worker pool.

Work is always split into the same chunks regardless of the worker count and
results are returned in chunk order, so outputs are bit-identical between
serial and threaded runs.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "TORUS_LOCALIZE_THREADS"


def default_threads() -> int:
    env = os.environ.get(ENV_THREADS)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def chunked_map(fn, chunks, threads: int | None = 1) -> list:
    chunks = list(chunks)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, chunks))
