"""Reproducible Monte Carlo blocks.

Samples are cut into fixed-size blocks.  Block ``j`` of job ``stream`` draws
from a Philox generator keyed by ``(seed, *stream, j)``, so the numbers a
sample sees depend only on its index, never on how blocks are scheduled.
Results come back in block order and are combined in that order.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

THREADS_ENV = "WEIERSTRASS_DIM_THREADS"
BLOCK_SIZE = 16384

T = TypeVar("T")


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def stream_key(*parts) -> tuple[int, ...]:
    """Map labels (str / int / float) to non-negative ints for SeedSequence."""
    out = []
    for p in parts:
        if isinstance(p, (int, np.integer)) and p >= 0:
            out.append(int(p))
        else:
            out.append(zlib.crc32(repr(p).encode()))
    return tuple(out)


def block_rng(seed: int, stream: Sequence[int], block: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), *stream, int(block)])
    return np.random.Generator(np.random.Philox(ss))


def map_blocks(fn: Callable[[np.random.Generator, int, int], T], n_samples: int, seed: int,
               stream: Sequence[int], workers: int | None = None,
               block_size: int = BLOCK_SIZE) -> list[T]:
    """Run ``fn(rng, size, start)`` over consecutive blocks; results in block order."""
    n_blocks = max(1, -(-n_samples // block_size))
    jobs = []
    for j in range(n_blocks):
        start = j * block_size
        jobs.append((j, start, min(block_size, n_samples - start)))

    def run(job):
        j, start, size = job
        return fn(block_rng(seed, stream, j), size, start)

    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or n_blocks == 1:
        return [run(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))


def count_hits(fn: Callable[[np.random.Generator, int, int], np.ndarray], n_samples: int,
               seed: int, stream: Sequence[int], workers: int | None = None) -> int:
    """Total number of True entries over all blocks (integer sum, order-free)."""
    return int(sum(int(np.count_nonzero(r)) for r in map_blocks(fn, n_samples, seed, stream, workers)))


def gather(fn, n_samples, seed, stream, workers=None) -> np.ndarray:
    return np.concatenate(map_blocks(fn, n_samples, seed, stream, workers))


def binomial_stderr(p: float, n: int) -> float:
    return float(np.sqrt(max(p * (1.0 - p), 0.0) / n)) if n > 0 else float("nan")
