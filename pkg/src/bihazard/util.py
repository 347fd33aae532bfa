"""Deterministic RNG streams, worker scheduling, and small I/O helpers."""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# Stream-path components, so call sites read as substream(seed, DATA, i)
# instead of bare integers.  Distinct components give independent streams.
DATA = 0
BOOTSTRAP = 1
BOOTSTRAP_SECOND = 2
PROBE = 3


def substream(master_seed, *path):
    """Independent random Generator keyed by (master_seed, path).

    Streams for distinct paths are statistically independent and do not
    depend on creation order, so per-replicate work can be scheduled onto
    any number of workers without changing a single drawn bit.
    """
    key = tuple(int(p) for p in path)
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)
    return np.random.default_rng(ss)


def run_indexed(fn, count, workers=1):
    """Evaluate fn(i) for i in range(count) and return results in index order.

    With workers > 1 the calls run on a thread pool; results are collected
    by index, so the output is identical to the sequential run provided
    fn(i) depends only on i.
    """
    count = int(count)
    if workers is None or workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    out = [None] * count
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        futures = [pool.submit(fn, i) for i in range(count)]
        for i, fut in enumerate(futures):
            out[i] = fut.result()
    return out


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def fmt_float(x):
    """Shortest decimal string that round-trips the float64 exactly."""
    return repr(float(x))
