"""The interpolated embedding of the infinite tree (T, rho) into the block model.

A node of length L in the band 2^n <= L <= 2^(n+1) is sent to
``lam * f_n(node) + (1 - lam) * f_(n+1)(node)`` with
``lam = (2^(n+1) - L) / 2^n``; the root is sent to 0.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .james import JamesSystem, bourgain_vector
from .stepped import BlockVector, SteppedVector, block_sup_distance, combine, scaled_sup_distance
from .tree import MAX_DEPTH, band

LIPSCHITZ_BOUND = Fraction(9)


def lambda_weight(length: int, n: int | None = None) -> tuple[int, Fraction]:
    """Band index and interpolation weight for a node of the given length.

    By default n = floor(log2(length)); an explicit ``n`` must satisfy
    2^n <= length <= 2^(n+1), which lets callers evaluate a length sitting
    on a band boundary with either neighbouring formula.
    """
    if length < 1:
        raise ValueError("the root has no interpolation weight (it maps to 0)")
    if n is None:
        n = band(length)
    elif not (1 << n) <= length <= (1 << (n + 1)):
        raise ValueError(f"length {length} is outside band [{1 << n}, {1 << (n + 1)}]")
    return n, Fraction((1 << (n + 1)) - length, 1 << n)


class HyperbolicEmbedding:
    def __init__(self, system: JamesSystem | None = None, max_depth: int = MAX_DEPTH):
        if not 0 <= max_depth <= MAX_DEPTH:
            raise ValueError(f"max_depth must be in 0..{MAX_DEPTH}")
        self.system = system or JamesSystem()
        self.max_depth = max_depth
        # every lam has denominator dividing 2^n <= 2^6, so SCALE * f(node) is integral
        self.scale = 1 << band(max(max_depth, 1))
        self._components = lru_cache(maxsize=1 << 16)(self._components_uncached)

    @property
    def theta(self) -> Fraction:
        return self.system.theta

    def bounds(self) -> tuple[Fraction, Fraction, Fraction]:
        """(Lipschitz bound, co-Lipschitz bound, distortion bound) = (9, theta/24, 216/theta)."""
        return LIPSCHITZ_BOUND, self.theta / 24, 216 / self.theta

    def _check(self, node: str) -> None:
        if len(node) > self.max_depth:
            raise ValueError(f"node depth {len(node)} exceeds max_depth {self.max_depth}")

    def embed(self, node: str, n: int | None = None) -> BlockVector:
        self._check(node)
        if not node:
            return BlockVector()
        n, lam = lambda_weight(len(node), n)
        parts = {}
        if lam:
            parts[n] = combine(lam, bourgain_vector(n, node), 0, SteppedVector.zero())
        if lam != 1:
            parts[n + 1] = combine(1 - lam, bourgain_vector(n + 1, node), 0, SteppedVector.zero())
        return BlockVector(parts)

    __call__ = embed

    def _components_uncached(self, node: str) -> tuple[tuple[int, SteppedVector, int], ...]:
        scale = self.scale
        return tuple((n, v, scale // v.den) for n, v in self.embed(node).blocks.items())

    def scaled_distance(self, a: str, b: str) -> int:
        """scale * ||f(a) - f(b)||, an exact integer."""
        ca = self._components(a)
        cb = self._components(b)
        best = 0
        for n, u, mu in ca:
            for m, v, mv in cb:
                if m == n:
                    d = scaled_sup_distance(u, mu, v, mv)
                    break
            else:
                d = mu * max(abs(x) for x in u.nums)
            if d > best:
                best = d
        for m, v, mv in cb:
            if not any(n == m for n, _, _ in ca):
                d = mv * max(abs(x) for x in v.nums)
                if d > best:
                    best = d
        return best

    def distance(self, a: str, b: str) -> Fraction:
        return Fraction(self.scaled_distance(a, b), self.scale)


def c0_distance(u: BlockVector, v: BlockVector) -> Fraction:
    return block_sup_distance(u, v)


def embed(e: HyperbolicEmbedding, node: str) -> BlockVector:
    return e.embed(node)
