"""Deterministic RNG streams and order-independent parallel mapping.

Every stochastic work unit (a domain, a matrix cell, a repetition, a fold)
derives its own generator from a structured key. Streams for distinct keys
are independent, so results do not depend on the order in which units run
or on how many threads run them.
"""

from __future__ import annotations

import concurrent.futures
import zlib
from typing import Callable, Iterable, Sequence

import numpy as np


def _key_part(part) -> int:
    # String tags are folded to a stable 32-bit value; ints pass through.
    if isinstance(part, (int, np.integer)):
        return int(part)
    return zlib.crc32(str(part).encode("utf-8"))


def rng_for(*key) -> np.random.Generator:
    """Return a Generator seeded from a structured key.

    Parts may be ints or short string tags, e.g. ``rng_for(seed, "pair", i, j)``.
    The same key always yields the same stream.
    """
    return np.random.default_rng(np.random.SeedSequence([_key_part(p) for p in key]))


def seed_int(*key) -> int:
    """A non-negative 31-bit integer derived from a structured key.

    Used to hand deterministic seeds to libraries that take plain ints.
    """
    return int(rng_for(*key).integers(0, 2**31 - 1))


def thread_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Map ``fn`` over ``items``, optionally on a thread pool.

    Output order follows input order regardless of scheduling, so a
    deterministic ``fn`` gives identical results for any thread count.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(x))
