"""Counter-based randomness: every draw is a pure function of (seed, counters).

Draws are independent of evaluation order, so any partition of the work
across processes reproduces the same values.
"""

from __future__ import annotations

import hashlib


def counter_bits(seed: int, *counters: int, nbytes: int = 32) -> int:
    """``8 * nbytes`` pseudo-random bits keyed by ``seed`` at position ``counters``."""
    key = seed.to_bytes(16, "little", signed=True)
    msg = b"".join(c.to_bytes(16, "little", signed=True) for c in counters)
    return int.from_bytes(hashlib.blake2b(msg, digest_size=nbytes, key=key).digest(), "little")


class BitStream:
    """Consume fields from a block of counter bits."""

    __slots__ = ("_bits",)

    def __init__(self, bits: int):
        self._bits = bits

    def take(self, n: int) -> int:
        out = self._bits & ((1 << n) - 1)
        self._bits >>= n
        return out

    def below(self, m: int) -> int:
        """Near-uniform integer in [0, m); bias below 2^-40 for m < 2^24."""
        return self.take(64) % m

    def between(self, lo: int, hi: int) -> int:
        """Integer in the closed range [lo, hi]."""
        return lo + self.below(hi - lo + 1)
