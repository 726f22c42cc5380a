"""Deterministic randomness for reproducible obfuscation.

The switch-wiring shuffle must be non-deterministic from the adversary's
point of view but bit-exactly reproducible from (inputs, seed) across
implementations and platforms, so we pin the generator completely:
splitmix64 with increment 0x9E3779B97F4A7C15 and mix multipliers
0xBF58476D1CE4E5B9 / 0x94D049BB133111EB (shift amounts 30/27/31), feeding
an in-place Fisher-Yates shuffle whose index draw is ``next() % (i + 1)``.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """splitmix64 stream seeded with a 64-bit unsigned integer."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Draw from [0, bound) by modulo reduction (frozen, documented bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, high index down to 1."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_u64s(self, count: int) -> list[int]:
        return [self.next_u64() for _ in range(count)]
