"""Seedable xoroshiro128+ generator with SplitMix64 seeding.

The stream is bit-exact with the 2016 Blackman/Vigna reference
(rotation constants 55, 14, 36), so runs replay identically across
platforms and implementations.
"""
from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_DOUBLE_UNIT = 1.0 / (1 << 53)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def splitmix64(state: int) -> tuple[int, int]:
    """One SplitMix64 step; returns ``(new_state, output)``."""
    state = (state + _GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def derive_seed(seed: int, salt: int) -> int:
    """Mix a salt (e.g. the k of a batch run) into a 64-bit seed."""
    _, out = splitmix64((seed ^ ((salt * _GOLDEN) & MASK64)) & MASK64)
    return out


class Xoroshiro128Plus:
    """xoroshiro128+ with explicit two-word state.

    One instance must not be shared between threads; hand it over or
    create independent generators from derived seeds instead.
    """

    __slots__ = ("s0", "s1")

    def __init__(self, s0: int, s1: int):
        s0 &= MASK64
        s1 &= MASK64
        if s0 == 0 and s1 == 0:
            raise ValueError("xoroshiro128+ state must not be all zero")
        self.s0 = s0
        self.s1 = s1

    @classmethod
    def from_seed(cls, seed: int) -> "Xoroshiro128Plus":
        sm = seed & MASK64
        while True:
            sm, s0 = splitmix64(sm)
            sm, s1 = splitmix64(sm)
            if s0 or s1:
                return cls(s0, s1)

    @property
    def state(self) -> tuple[int, int]:
        return self.s0, self.s1

    def copy(self) -> "Xoroshiro128Plus":
        return Xoroshiro128Plus(self.s0, self.s1)

    def next_u64(self) -> int:
        s0, s1 = self.s0, self.s1
        result = (s0 + s1) & MASK64
        s1 ^= s0
        self.s0 = _rotl(s0, 55) ^ s1 ^ ((s1 << 14) & MASK64)
        self.s1 = _rotl(s1, 36)
        return result

    def next_index(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)``.

        Takes the top ``bits(bound - 1)`` bits and rejects values outside
        the range, so no modulo bias is introduced.
        """
        if bound < 1:
            raise ValueError(f"bound must be positive, got {bound}")
        shift = 64 - (bound - 1).bit_length()
        while True:
            r = self.next_u64() >> shift
            if r < bound:
                return r

    def next_double(self) -> float:
        """Uniform float in ``[0, 1)`` from the top 53 bits."""
        return (self.next_u64() >> 11) * _DOUBLE_UNIT

    def next_gaussian(self) -> float:
        # Box-Muller, one variate per call; 1 - u keeps the log argument in (0, 1]
        u1 = 1.0 - self.next_double()
        u2 = self.next_double()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def sample_k(self, n: int, m: int) -> list[int]:
        """``m`` distinct indices from ``range(n)`` by partial Fisher-Yates."""
        if not 1 <= m <= n:
            raise ValueError(f"cannot sample {m} of {n} elements")
        pool = list(range(n))
        for i in range(m):
            j = i + self.next_index(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:m]


def make_rng(seed_or_rng: "int | Xoroshiro128Plus | None") -> Xoroshiro128Plus:
    if isinstance(seed_or_rng, Xoroshiro128Plus):
        return seed_or_rng
    return Xoroshiro128Plus.from_seed(0 if seed_or_rng is None else int(seed_or_rng))


# Functional aliases for callers that think in terms of generator state.
def rng_next(state: Xoroshiro128Plus) -> int:
    return state.next_u64()


def rng_index(state: Xoroshiro128Plus, bound: int) -> int:
    return state.next_index(bound)


def sample_k(state: Xoroshiro128Plus, n: int, m: int) -> list[int]:
    return state.sample_k(n, m)
