"""Exact piecewise-constant vectors over huge coordinate ranges.

A :class:`SteppedVector` stores breakpoints ``ups`` and integer numerators
``nums`` over one positive denominator ``den``: it takes the value
``nums[i] / den`` on coordinates ``(ups[i-1], ups[i]]`` (coordinates start at
1, ``ups[-1]`` is the last nonzero coordinate).  Summing vectors with
support of size ~2^65 cost a single segment.
"""

from __future__ import annotations

from bisect import bisect_left
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Mapping


class SteppedVector:
    __slots__ = ("ups", "nums", "den")

    def __init__(self, ups: tuple[int, ...], nums: tuple[int, ...], den: int = 1):
        # trusted constructor, see from_segments / _canonical for validated paths
        self.ups = ups
        self.nums = nums
        self.den = den

    @classmethod
    def zero(cls) -> "SteppedVector":
        return _ZERO

    @classmethod
    def from_segments(cls, segments: Iterable[tuple[int, Fraction | int]]) -> "SteppedVector":
        """Build from ``(upTo, value)`` pairs with strictly increasing ``upTo`` >= 1."""
        segs = [(int(u), Fraction(v)) for u, v in segments]
        prev = 0
        for u, _ in segs:
            if u <= prev:
                raise ValueError("segment breakpoints must be strictly increasing and >= 1")
            prev = u
        den = 1
        for _, v in segs:
            den = den * v.denominator // gcd(den, v.denominator)
        return _canonical([u for u, _ in segs], [v.numerator * (den // v.denominator) for _, v in segs], den)

    @classmethod
    def from_dense(cls, values: Iterable[Fraction | int]) -> "SteppedVector":
        return cls.from_segments((i, v) for i, v in enumerate(values, start=1))

    @property
    def segments(self) -> list[tuple[int, Fraction]]:
        return [(u, Fraction(n, self.den)) for u, n in zip(self.ups, self.nums)]

    @property
    def support_end(self) -> int:
        return self.ups[-1] if self.ups else 0

    def is_zero(self) -> bool:
        return not self.ups

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SteppedVector):
            return NotImplemented
        return self.ups == other.ups and self.nums == other.nums and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.ups, self.nums, self.den))

    def __repr__(self) -> str:
        body = ", ".join(f"({u}, {v})" for u, v in self.segments)
        return f"SteppedVector([{body}])"

    def __neg__(self) -> "SteppedVector":
        return SteppedVector(self.ups, tuple(-n for n in self.nums), self.den)

    def __add__(self, other: "SteppedVector") -> "SteppedVector":
        return combine(1, self, 1, other)

    def __sub__(self, other: "SteppedVector") -> "SteppedVector":
        return combine(1, self, -1, other)

    def scale(self, alpha: Fraction | int) -> "SteppedVector":
        return combine(alpha, self, 0, _ZERO)

    def to_dense(self, length: int) -> list[Fraction]:
        """Coordinates 1..length; only sensible for small supports."""
        out = []
        i = 0
        for k in range(1, length + 1):
            while i < len(self.ups) and self.ups[i] < k:
                i += 1
            out.append(Fraction(self.nums[i], self.den) if i < len(self.ups) else Fraction(0))
        return out

    def to_json(self) -> list[list]:
        return [[str(u), v.numerator, v.denominator] for u, v in self.segments]

    @classmethod
    def from_json(cls, data: Iterable[Iterable]) -> "SteppedVector":
        return cls.from_segments((int(u), Fraction(int(n), int(d))) for u, n, d in data)


_ZERO = SteppedVector((), (), 1)


def _canonical(ups: list[int], nums: list[int], den: int) -> SteppedVector:
    """Merge equal adjacent plateaus, drop trailing zeros, reduce the denominator."""
    if den <= 0:
        raise ValueError("denominator must be positive")
    out_u: list[int] = []
    out_n: list[int] = []
    for u, n in zip(ups, nums):
        if out_n and out_n[-1] == n:
            out_u[-1] = u
        else:
            out_u.append(u)
            out_n.append(n)
    while out_n and out_n[-1] == 0:
        out_n.pop()
        out_u.pop()
    if not out_n:
        return _ZERO
    g = den
    for n in out_n:
        g = gcd(g, n)
        if g == 1:
            break
    if g > 1:
        out_n = [n // g for n in out_n]
        den //= g
    return SteppedVector(tuple(out_u), tuple(out_n), den)


def summing_vector(j: int) -> SteppedVector:
    """x_j = e_1 + ... + e_{j-1}; the zero vector for j == 1."""
    if j < 1:
        raise ValueError(f"summing vector index must be >= 1, got {j}")
    if j == 1:
        return _ZERO
    return SteppedVector((j - 1,), (1,), 1)


def step_from_indices(indices: list[int]) -> SteppedVector:
    """Sum of summing vectors x_j over a strictly increasing list of indices j.

    Coordinate i equals the number of listed j with j > i.
    """
    count = len(indices)
    ups = []
    nums = []
    for pos in range(count - 1):
        # count - 1 - pos indices exceed coordinates in [indices[pos], indices[pos+1] - 1]
        ups.append(indices[pos + 1] - 1)
        nums.append(count - 1 - pos)
    if indices and indices[0] > 1:
        ups.insert(0, indices[0] - 1)
        nums.insert(0, count)
    return SteppedVector(tuple(ups), tuple(nums), 1)


def combine(alpha: Fraction | int, u: SteppedVector, beta: Fraction | int, v: SteppedVector) -> SteppedVector:
    """alpha * u + beta * v in canonical form."""
    alpha = Fraction(alpha)
    beta = Fraction(beta)
    da = alpha.denominator * u.den
    db = beta.denominator * v.den
    den = da * db // gcd(da, db)
    ca = alpha.numerator * (den // da)
    cb = beta.numerator * (den // db)
    ups: list[int] = []
    nums: list[int] = []
    au, an, bu, bn = u.ups, u.nums, v.ups, v.nums
    i = j = 0
    la, lb = len(au), len(bu)
    while i < la and j < lb:
        x = au[i]
        y = bu[j]
        nums.append(ca * an[i] + cb * bn[j])
        if x < y:
            ups.append(x)
            i += 1
        elif y < x:
            ups.append(y)
            j += 1
        else:
            ups.append(x)
            i += 1
            j += 1
    while i < la:
        ups.append(au[i])
        nums.append(ca * an[i])
        i += 1
    while j < lb:
        ups.append(bu[j])
        nums.append(cb * bn[j])
        j += 1
    return _canonical(ups, nums, den)


def sup_norm(v: SteppedVector) -> Fraction:
    if not v.nums:
        return Fraction(0)
    return Fraction(max(abs(n) for n in v.nums), v.den)


def coord(v: SteppedVector, k: int) -> Fraction:
    if k < 1:
        raise ValueError(f"coordinates start at 1, got {k}")
    i = bisect_left(v.ups, k)
    if i == len(v.ups):
        return Fraction(0)
    return Fraction(v.nums[i], v.den)


def scaled_sup_distance(u: SteppedVector, cu: int, v: SteppedVector, cv: int) -> int:
    """max_k |cu * u.nums[k] - cv * v.nums[k]| over the merged partition.

    With ``cu = D // u.den`` and ``cv = D // v.den`` this is D times the sup
    distance, computed without building the difference vector.
    """
    au, an, bu, bn = u.ups, u.nums, v.ups, v.nums
    la, lb = len(au), len(bu)
    i = j = 0
    best = 0
    while i < la and j < lb:
        d = cu * an[i] - cv * bn[j]
        if d < 0:
            d = -d
        if d > best:
            best = d
        x = au[i]
        y = bu[j]
        if x < y:
            i += 1
        elif y < x:
            j += 1
        else:
            i += 1
            j += 1
    if i < la:
        t = cu * max(abs(n) for n in an[i:])
        if t > best:
            best = t
    if j < lb:
        t = cv * max(abs(n) for n in bn[j:])
        if t > best:
            best = t
    return best


class BlockVector:
    """Finite map block id -> nonzero SteppedVector; Pi_n is :meth:`block`."""

    __slots__ = ("blocks",)

    def __init__(self, blocks: Mapping[int, SteppedVector] | None = None):
        self.blocks = {n: b for n, b in sorted((blocks or {}).items()) if not b.is_zero()}

    def block(self, n: int) -> SteppedVector:
        return self.blocks.get(n, _ZERO)

    def restrict(self, n: int) -> "BlockVector":
        return BlockVector({n: self.block(n)})

    def support(self) -> set[int]:
        return set(self.blocks)

    def is_zero(self) -> bool:
        return not self.blocks

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BlockVector):
            return NotImplemented
        return self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash(tuple(self.blocks.items()))

    def __repr__(self) -> str:
        return f"BlockVector({self.blocks!r})"

    def __add__(self, other: "BlockVector") -> "BlockVector":
        return block_combine(1, self, 1, other)

    def __sub__(self, other: "BlockVector") -> "BlockVector":
        return block_combine(1, self, -1, other)

    def norm(self) -> Fraction:
        return max((sup_norm(b) for b in self.blocks.values()), default=Fraction(0))

    def to_json(self) -> dict[str, list[list]]:
        return {str(n): b.to_json() for n, b in self.blocks.items()}

    @classmethod
    def from_json(cls, data: Mapping[str, Iterable]) -> "BlockVector":
        return cls({int(n): SteppedVector.from_json(segs) for n, segs in data.items()})


def block_combine(alpha: Fraction | int, u: BlockVector, beta: Fraction | int, v: BlockVector) -> BlockVector:
    ids = set(u.blocks) | set(v.blocks)
    return BlockVector({n: combine(alpha, u.block(n), beta, v.block(n)) for n in ids})


def block_sup_distance(u: BlockVector, v: BlockVector) -> Fraction:
    """Sup norm of u - v: the largest blockwise sup distance."""
    best = Fraction(0)
    for n in set(u.blocks) | set(v.blocks):
        a = u.block(n)
        b = v.block(n)
        den = a.den * b.den // gcd(a.den, b.den)
        d = Fraction(scaled_sup_distance(a, den // a.den, b, den // b.den), den)
        if d > best:
            best = d
    return best


def iter_breakpoint_probes(v: SteppedVector) -> Iterator[int]:
    """Coordinates adjacent to every breakpoint, for spot checks."""
    seen = set()
    for u in v.ups:
        for k in (u - 1, u, u + 1):
            if k >= 1 and k not in seen:
                seen.add(k)
                yield k
