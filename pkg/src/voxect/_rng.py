"""Deterministic pseudo-random primitives.

A small splitmix64 stream underlies every stochastic choice in the
package (direction sampling, randomized verification trials) so results
reproduce bit for bit across platforms and numpy versions. Not suitable
for cryptography.
"""
from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """splitmix64: one well-mixed 64-bit output per step."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _finalize(self._state)

    def uniform(self) -> float:
        # in (0, 1]; never 0 so log() stays finite
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def normal_pair(self) -> tuple[float, float]:
        """Two independent standard normals (Box-Muller)."""
        r = math.sqrt(-2.0 * math.log(self.uniform()))
        t = 2.0 * math.pi * self.uniform()
        return r * math.cos(t), r * math.sin(t)

    def unit_vector(self) -> tuple[float, float, float]:
        """Uniform direction on the unit sphere.

        Three standard normals, normalized; degenerate draws with norm
        below 1e-12 are redrawn.
        """
        while True:
            z0, z1 = self.normal_pair()
            z2, _ = self.normal_pair()
            norm = math.sqrt(z0 * z0 + z1 * z1 + z2 * z2)
            if norm >= 1e-12:
                return z0 / norm, z1 / norm, z2 / norm

    def below(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection."""
        top = (1 << 64) - ((1 << 64) % n)
        while True:
            z = self.next_u64()
            if z < top:
                return z % n


def mix_seed(seed: int, index: int) -> int:
    """Decorrelated child seed for trial `index` of a suite seeded with `seed`."""
    return _finalize((seed + (index + 1) * _GAMMA) & _MASK)
