"""Portable xorshift64* generator (Vigna 2016) so sampled reports reproduce across platforms.

State update: x ^= x >> 12; x ^= x << 25; x ^= x >> 27 (mod 2⁶⁴).
Output: x · 0x2545F4914F6CDD1D (mod 2⁶⁴).  Seeds are expanded with one
splitmix64 step so seed 0 is usable.  Doubles take the top 53 bits.
"""

from __future__ import annotations

import math

import numpy as np

MASK = (1 << 64) - 1
MULT = 0x2545F4914F6CDD1D
SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(z):
    z = (z + SPLITMIX_GAMMA) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class XorShift64Star:
    """Minimal numpy-Generator-like surface: ``uniform``, ``normal``, ``integers``."""

    def __init__(self, seed=0):
        self.state = splitmix64(int(seed) & MASK) or 1

    def next_u64(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK
        x ^= x >> 27
        self.state = x
        return (x * MULT) & MASK

    def random(self):
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def _fill(self, draw, size):
        if size is None:
            return draw()
        shape = (size,) if isinstance(size, int) else tuple(size)
        n = int(np.prod(shape)) if shape else 1
        return np.array([draw() for _ in range(n)], float).reshape(shape)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._fill(lambda: low + (high - low) * self.random(), size)

    def _gauss(self):
        # Box–Muller; 1 − u keeps the log argument in (0, 1]
        u1, u2 = 1.0 - self.random(), self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._fill(lambda: loc + scale * self._gauss(), size)

    def integers(self, low, high=None, size=None):
        if high is None:
            low, high = 0, low
        span = high - low
        out = self._fill(lambda: float(low + self.next_u64() % span), size)
        return out.astype(np.int64) if isinstance(out, np.ndarray) else int(out)

    def spawn(self, key):
        """Independent child stream keyed by a string (stable across runs)."""
        h = 0
        for ch in str(key).encode():
            h = splitmix64(h ^ ch)
        return XorShift64Star(self.state ^ h)
