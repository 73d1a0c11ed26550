"""Seeded, counter-based random streams.

Every sampler in the package draws from ``Philox`` keyed by a ``SeedSequence``
built from ``(seed, *stream)``. Distinct stream ids never overlap, so parallel
cells of an experiment can be generated in any order.
"""
import zlib

import numpy as np


def _as_int(key):
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    return int(key)


def make_rng(seed, *stream):
    """Return a ``numpy.random.Generator`` for ``seed`` and optional stream ids.

    Stream ids may be integers or strings (strings are hashed with CRC32).
    """
    entropy = [_as_int(seed)] + [_as_int(s) for s in stream]
    if any(e < 0 for e in entropy):
        raise ValueError("seeds and stream ids must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed, *stream):
    """Derive a 64-bit child seed, for handing a sub-stream to another sampler."""
    entropy = [_as_int(seed)] + [_as_int(s) for s in stream]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0])
