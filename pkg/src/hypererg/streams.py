"""Reproducible random streams.

Every random draw in the package comes from a generator built by
:func:`substream`.  A substream is addressed by the master seed plus a tuple of
non-negative integers (its *key*), which numpy's ``SeedSequence`` hashes into
an independent PCG64 state.  Work split over W workers uses keys ending in the
chunk index ``0 .. W-1``; results are merged in chunk order, so they depend on
(seed, W) and never on scheduling.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from hypererg.errors import ConfigError

WORKERS_ENV = "HYPERERG_WORKERS"
MAX_SEED = 2**64 - 1

# stream tags, kept small and fixed so keys stay stable across releases
TAG_AVERAGE = 1
TAG_STARTS = 2
TAG_MAXIMAL = 3
TAG_NORM = 4
TAG_SAMPLE = 5


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ConfigError("seed must be a 64-bit unsigned value")
    return seed


def substream(seed: int, *key: int) -> np.random.Generator:
    """The generator for ``(seed, key)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def split(n: int, workers: int) -> list[int]:
    """Chunk sizes for n draws over ``workers`` streams; the first ``n % W`` get one extra."""
    if n < 1:
        raise ValueError("n must be at least 1")
    workers = max(1, min(int(workers), n))
    q, rem = divmod(n, workers)
    return [q + (i < rem) for i in range(workers)]


def resolve_workers(workers: int | None) -> int:
    """Explicit value, else ``$HYPERERG_WORKERS``, else 1."""
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "").strip()
        if not raw:
            return 1
        try:
            workers = int(raw)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if workers < 1:
        raise ConfigError("worker count must be at least 1")
    return int(workers)


def run_ordered(fn: Callable, tasks: Sequence, workers: int) -> list:
    """``[fn(t) for t in tasks]``, optionally in a process pool; output order is task order."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def concat(chunks: Iterable[np.ndarray]) -> np.ndarray:
    return np.concatenate(list(chunks))
