"""Deterministic pseudo-random numbers for reproducible experiments.

Every stochastic choice in this package (instance coefficients, initial
QAOA angles, measurement shots) flows through Xoshiro256StarStar seeded via
SplitMix64, so a run is identified by (seed, stream) alone and results are
bit-stable across platforms and numpy versions.

Streams: a generator for (seed, stream) mixes the stream index into the
seed with the golden-ratio increment before expanding it into state, so
distinct streams of the same seed are decorrelated and independent of the
order in which they are created.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Stream indices used across the package. Keeping them in one table means a
# new consumer cannot silently collide with an existing one.
STREAM_INSTANCE = 0
STREAM_INIT = 1
STREAM_SHOTS = 2


def _splitmix64_next(state: int) -> tuple[int, int]:
    """Advance splitmix64 once; returns (output, new_state)."""
    state = (state + _GOLDEN) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64, state


class SplitMix64:
    """64-bit splitmix64 generator, used only to expand seeds into state."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        out, self._state = _splitmix64_next(self._state)
        return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** with splitmix64 seeding.

    `stream` selects a decorrelated substream of the same seed: the state is
    expanded from seed XOR (stream * golden ratio). Stream 0 is the plain
    seeded generator.
    """

    def __init__(self, seed: int, stream: int = 0):
        if stream < 0:
            raise ValueError("stream index must be >= 0")
        mixer = SplitMix64((seed ^ (stream * _GOLDEN)) & _MASK64)
        self._s = [mixer.next_uint64() for _ in range(4)]
        if not any(self._s):  # all-zero state is the one fixed point
            self._s[0] = _GOLDEN

    def next_uint64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform double in [0, 1): top 53 bits scaled by 2**-53."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform double in [lo, hi)."""
        if not hi > lo:
            raise ValueError(f"empty interval [{lo}, {hi})")
        return lo + (hi - lo) * self.random()

    def randint_below(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection on the top bits."""
        if n <= 0:
            raise ValueError("n must be positive")
        # Rejection keeps the distribution exactly uniform.
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_uint64()
            if x < limit:
                return x % n


def spawn(seed: int, stream: int) -> Xoshiro256StarStar:
    """Named substream of `seed`; see the STREAM_* constants."""
    return Xoshiro256StarStar(seed, stream=stream)
