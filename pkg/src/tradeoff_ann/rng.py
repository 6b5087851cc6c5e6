"""Named, counter-derived random streams.

Every random draw in the package comes from a stream identified by
``(master_seed, name, *counters)``. The stream for a given identifier is
a fresh ``PCG64`` seeded through ``SeedSequence(entropy=master_seed,
spawn_key=(crc32(name), *counters))``, so the values a stream produces
never depend on which other streams were consumed first. This derivation
is frozen: changing it changes every generated dataset and tree.
"""
from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def name_tag(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def stream(seed: int, name: str, *counters: int) -> np.random.Generator:
    """Return the generator for stream ``name`` at position ``counters``."""
    key = (name_tag(name),) + tuple(int(c) for c in counters)
    if any(k < 0 for k in key):
        raise ValueError("stream counters must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def chunked_normal(seed: int, name: str, rows: int, cols: int,
                   chunk: int = 1024) -> np.ndarray:
    """Standard normal ``rows x cols`` matrix, one substream per row chunk.

    Row ``i`` always lands in chunk ``i // chunk``, so the matrix is the same
    whether chunks are produced serially or in parallel.
    """
    out = np.empty((rows, cols))
    for k, start in enumerate(range(0, rows, chunk)):
        stop = min(rows, start + chunk)
        out[start:stop] = stream(seed, name, k).standard_normal((stop - start, cols))
    return out
