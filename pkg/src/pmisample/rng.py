"""Counter-based random numbers.

Every random quantity in the package is a pure function of ``(seed, stream,
counter)``. The generator is SplitMix64 used in random-access form: the
``i``-th draw of a stream with key ``k`` is::

    z = k + (i + 1) * 0x9E3779B97F4A7C15   (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)
    u = (z >> 11) * 2**-53                  # uniform on [0, 1)

and the stream key is ``k = mix64(seed ^ mix64(stream))`` with ``mix64`` the
three finaliser lines above applied to its argument. Only wrapping integer
arithmetic is involved, so draws are identical on every platform and do not
depend on iteration order or on how work is split between threads.
"""

import zlib

import numpy as np

from . import kernels

MASK64 = (1 << 64) - 1


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_id(name):
    """Stable 32-bit id for a named stream (CRC-32 of its UTF-8 bytes)."""
    return zlib.crc32(name.encode("utf-8"))


def stream_key(seed, stream):
    """Derive the 64-bit key for ``stream`` (int or str) under ``seed``."""
    if isinstance(stream, str):
        stream = stream_id(stream)
    seed = int(seed)
    if seed < 0 or seed > MASK64:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    return mix64(seed ^ mix64(int(stream)))


def uniform(seed, stream, counters):
    """Uniform [0, 1) draws at the given integer counters."""
    return kernels.uniform_at(stream_key(seed, stream), counters)


def uniform_range(seed, stream, n, start=0):
    return uniform(seed, stream, np.arange(start, start + n, dtype=np.uint64))


def bernoulli(seed, stream, counters, prob):
    """Independent Bernoulli(prob[i]) outcome for every counter."""
    return kernels.bernoulli_at(stream_key(seed, stream), counters, prob)
