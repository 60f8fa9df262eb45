"""Portable pseudo-random stream for the channel simulator.

The generator is xorshift64* seeded through splitmix64, so any
implementation following the description below reproduces streams exactly:

* seeding: ``state = splitmix64(seed)``; a zero result is replaced by
  ``0x9E3779B97F4A7C15``.
* step: ``s ^= s >> 12; s ^= s << 25; s ^= s >> 27`` (all mod 2^64);
  output ``s * 0x2545F4914F6CDD1D mod 2^64``.
* ``below(q)``: draw ``r`` until ``r < 2^64 - (2^64 mod q)``, return ``r mod q``.
* ``uniform()``: ``(r >> 11) * 2^-53``.
"""
from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
MULT = 0x2545F4914F6CDD1D
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    z = (x + GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int):
        self.seed = int(seed)
        s = splitmix64(self.seed & MASK)
        self.state = s if s else GOLDEN

    def next_u64(self) -> int:
        s = self.state
        s ^= s >> 12
        s ^= (s << 25) & MASK
        s ^= s >> 27
        self.state = s
        return (s * MULT) & MASK

    def below(self, q: int) -> int:
        if q <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % q)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % q

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def bernoulli(self, p: float) -> bool:
        return self.uniform() < p

    def vector(self, q: int, length: int) -> np.ndarray:
        return np.array([self.below(q) for _ in range(length)], dtype=np.int64)

    def choice(self, items):
        return items[self.below(len(items))]

    def sample(self, population: int, k: int) -> list[int]:
        """``k`` distinct indices of ``range(population)`` by a partial Fisher-Yates shuffle."""
        idx = list(range(population))
        for i in range(k):
            j = i + self.below(population - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]

    def integers(self, low: int, high: int | None = None, size=None):
        """Subset of ``numpy.random.Generator.integers`` (row-major draw order)."""
        if high is None:
            low, high = 0, low
        if size is None:
            return low + self.below(high - low)
        shape = (size,) if isinstance(size, int) else tuple(size)
        count = int(np.prod(shape)) if shape else 1
        flat = [low + self.below(high - low) for _ in range(count)]
        return np.array(flat, dtype=np.int64).reshape(shape)

    def spawn_seed(self) -> int:
        return self.next_u64()
