"""Reproducible randomness on top of the Philox 4x64 counter-based generator.

A stream is identified by (seed, stream_id); the pair forms the 128-bit
Philox key, so distinct stream ids give statistically independent streams
without shared state, identically on every platform.  Everything is derived
from the raw 64-bit word output in a fixed order:

* ``bits(k)``     - bit j of the result is bit j % 64 of word j // 64
* ``indices``     - masked rejection from the next power-of-two range
* ``bernoulli``   - word >> 11 scaled to [0, 1) compared against p

A stream is single-owner: one consumer per stream, fresh streams via
``derive``.  The generator name recorded in output metadata is
``philox4x64``.
"""

from __future__ import annotations

import numpy as np

GENERATOR_NAME = "philox4x64"

_U64 = 1 << 64


def mix_seed(seed: int, *parts: int) -> int:
    """Derive a 64-bit seed from a master seed and integer tags (splitmix64)."""
    z = seed % _U64
    for p in parts:
        z = (z + 0x9E3779B97F4A7C15 + (p % _U64)) % _U64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) % _U64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) % _U64
        z = z ^ (z >> 31)
    return z


class RngStream:
    """Deterministic single-owner random stream."""

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = seed % _U64
        self.stream_id = stream_id % _U64
        self._bitgen = np.random.Philox(key=(self.stream_id << 64) | self.seed)

    def derive(self, offset: int) -> "RngStream":
        """Fresh independent stream at stream_id + offset."""
        return RngStream(self.seed, self.stream_id + offset)

    def words(self, count: int) -> np.ndarray:
        """Next ``count`` raw 64-bit words."""
        if count == 0:
            return np.empty(0, dtype=np.uint64)
        return self._bitgen.random_raw(count)

    def bits(self, k: int):
        """Next k bits as a BitVec (bit j = bit j%64 of word j//64)."""
        from .bitvec import BitVec

        if k == 0:
            return BitVec(0)
        w = self.words((k + 63) // 64)
        value = int.from_bytes(w.astype("<u8").tobytes(), "little") & ((1 << k) - 1)
        return BitVec(k, value)

    def indices(self, bound: int, count: int) -> np.ndarray:
        """``count`` unbiased integers in [0, bound) by masked rejection."""
        if bound < 1:
            raise ValueError("bound must be at least 1")
        out = np.empty(count, dtype=np.int64)
        if bound == 1:
            out[:] = 0
            return out
        nbits = (bound - 1).bit_length()
        mask = np.uint64((1 << nbits) - 1)
        accept = bound / float(1 << nbits)
        filled = 0
        while filled < count:
            need = count - filled
            draw = int(need / accept * 1.05) + 16
            cand = (self.words(draw) & mask).astype(np.int64)
            good = cand[cand < bound]
            take = min(len(good), need)
            out[filled : filled + take] = good[:take]
            filled += take
        return out

    def index(self, bound: int) -> int:
        """One unbiased integer in [0, bound)."""
        return int(self.indices(bound, 1)[0])

    def big_index(self, bound: int) -> int:
        """Unbiased integer in [0, bound) for arbitrary-precision bounds."""
        if bound < 1:
            raise ValueError("bound must be at least 1")
        if bound == 1:
            return 0
        k = (bound - 1).bit_length()
        while True:
            v = self.bits(k).bits
            if v < bound:
                return v

    def uniform(self, count: int) -> np.ndarray:
        """``count`` floats uniform in [0, 1), 53-bit mantissas."""
        return (self.words(count) >> np.uint64(11)) * (2.0 ** -53)

    def bernoulli(self, p: float, count: int) -> np.ndarray:
        """``count`` Bernoulli(p) bits as uint8."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {p}")
        return (self.uniform(count) < p).astype(np.uint8)
