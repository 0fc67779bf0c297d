"""The embedding of (T, d_p) into an l_p-sum of finite-dimensional l_p blocks.

Block m has dimension 2^(m+1).  f_m(node) = R_m(phi(node)) where phi lists the
signs of the node and R_m is a diagonal map with entries in [1/2, 1]; nodes of
length L, 2^m <= L <= 2^(m+1), interpolate f_m and f_(m+1) as in the
hyperbolic construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .hyperbolic import lambda_weight
from .sampling import counter_bits
from .tree import MAX_DEPTH, band, hamming_and_tail

ISO_MODES = ("identity", "half", "random")
MAX_LP_BLOCK = 7
LIPSCHITZ_BOUND = Fraction(9)
COLIPSCHITZ_BOUND = Fraction(1, 32)
DISTORTION_BOUND = Fraction(288)

# random diagonal entries are 1/2 + k / 2^33 with 0 <= k < 2^32
_ENTRY_BITS = 33


def block_dim(m: int) -> int:
    return 1 << (m + 1)


def block_offset(m: int) -> int:
    """Start of block m in the concatenated coordinate layout."""
    return (1 << (m + 1)) - 2


def phi(node: str, dim: int) -> list[int]:
    """Signs of ``node`` as the first coordinates of a ``dim``-vector."""
    if len(node) > dim:
        raise ValueError(f"node of depth {len(node)} does not fit dimension {dim}")
    out = [1 if c == "+" else -1 for c in node]
    out.extend([0] * (dim - len(node)))
    return out


@lru_cache(maxsize=256)
def _entry_numerators(mode: str, block: int, seed: int) -> tuple[int, ...]:
    """Diagonal entries of R_block times 2^33."""
    dim = block_dim(block)
    if mode == "identity":
        return (1 << _ENTRY_BITS,) * dim
    if mode == "half":
        return (1 << (_ENTRY_BITS - 1),) * dim
    return tuple(
        (1 << (_ENTRY_BITS - 1)) + (counter_bits(seed, block, i, nbytes=8) >> 32) for i in range(dim)
    )


@dataclass(frozen=True)
class DiagonalIso:
    mode: str = "identity"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ISO_MODES:
            raise ValueError(f"unknown iso mode {self.mode!r}; expected one of {ISO_MODES}")

    def exact_entries(self, block: int) -> list[Fraction]:
        return [Fraction(k, 1 << _ENTRY_BITS) for k in self.scaled_entries(block)]

    def scaled_entries(self, block: int) -> tuple[int, ...]:
        if not 0 <= block <= MAX_LP_BLOCK:
            raise ValueError(f"block index must be in 0..{MAX_LP_BLOCK}, got {block}")
        return _entry_numerators(self.mode, block, self.seed)

    def entries(self, block: int) -> np.ndarray:
        # dyadic with 33 bits: exactly representable
        return np.array(self.scaled_entries(block), dtype=np.float64) / float(1 << _ENTRY_BITS)

    def apply(self, block: int, u: Sequence[float]) -> np.ndarray:
        return self.entries(block) * np.asarray(u, dtype=np.float64)


def make_iso(mode: str, block: int, seed: int = 0) -> np.ndarray:
    return DiagonalIso(mode, seed).entries(block)


class LpBlockVector:
    """Finite map block id m -> coordinates (length 2^(m+1))."""

    __slots__ = ("blocks",)

    def __init__(self, blocks: Mapping[int, Sequence] | None = None):
        self.blocks = {}
        for m, coords in sorted((blocks or {}).items()):
            coords = list(coords)
            if len(coords) != block_dim(m):
                raise ValueError(f"block {m} must have dimension {block_dim(m)}, got {len(coords)}")
            self.blocks[m] = coords

    def block(self, m: int) -> list:
        return self.blocks.get(m, [0] * block_dim(m))

    def norm(self, p: float):
        return lp_sum_distance(self, LpBlockVector(), p)

    def to_json(self) -> dict[str, list]:
        return {str(m): [_json_number(x) for x in coords] for m, coords in self.blocks.items()}

    def __repr__(self) -> str:
        return f"LpBlockVector({self.blocks!r})"


def _json_number(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else float(x)
    return float(x)


def _pow_sum(xs, p):
    if p == 1:
        return sum(abs(x) for x in xs)
    return sum(abs(float(x)) ** p for x in xs)


def lp_sum_distance(u: LpBlockVector, v: LpBlockVector, p: float):
    """(sum over blocks of ||u_m - v_m||_p^p)^(1/p); exact for p = 1 with rational entries."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    total = 0
    for m in sorted(set(u.blocks) | set(v.blocks)):
        total += _pow_sum((x - y for x, y in zip(u.block(m), v.block(m))), p)
    if p == 1:
        return total
    return float(total) ** (1.0 / p)


def _check_node(node: str, p: float, max_depth: int = MAX_DEPTH) -> None:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if len(node) > max_depth:
        raise ValueError(f"node depth {len(node)} exceeds {max_depth}")


def embed_lp(node: str, p: float, iso: DiagonalIso, m: int | None = None, exact: bool = False) -> LpBlockVector:
    """Image of ``node``; with ``exact`` the coordinates are Fractions."""
    _check_node(node, p)
    if not node:
        return LpBlockVector()
    m, lam = lambda_weight(len(node), m)
    blocks = {}
    for blk, weight in ((m, lam), (m + 1, 1 - lam)):
        if not weight:
            continue
        signs = phi(node, block_dim(blk))
        if exact:
            blocks[blk] = [weight * d * s for d, s in zip(iso.exact_entries(blk), signs)]
        else:
            blocks[blk] = list(float(weight) * iso.apply(blk, signs))
    return LpBlockVector(blocks)


def tree_dp(a: str, b: str, p: float):
    diff, tail = hamming_and_tail(a, b)
    if p == 1:
        return 2 * diff + tail
    return (diff * 2.0**p + tail) ** (1.0 / p)


class LpEmbedding:
    """Dense, layout-aware evaluation of the l_p construction for auditing.

    For p == 1 coordinates are kept as int64 multiples of 2^-40 so distances
    are exact integers over :attr:`scale`.
    """

    def __init__(self, p: float = 2.0, iso: DiagonalIso | None = None, max_depth: int = MAX_DEPTH):
        if p < 1:
            raise ValueError(f"p must be >= 1, got {p}")
        if not 0 <= max_depth <= MAX_DEPTH:
            raise ValueError(f"max_depth must be in 0..{MAX_DEPTH}")
        self.p = float(p)
        self.exact = self.p == 1.0
        self.iso = iso or DiagonalIso()
        self.max_depth = max_depth
        top = max((band(n) + (n & (n - 1) != 0) for n in range(1, max_depth + 1)), default=0)
        self.width = block_offset(top + 1)
        self.scale = 1 << 40
        self._row = lru_cache(maxsize=1 << 16)(self._row_uncached)

    def bounds(self):
        if self.exact:
            return LIPSCHITZ_BOUND, COLIPSCHITZ_BOUND, DISTORTION_BOUND
        return float(LIPSCHITZ_BOUND), float(COLIPSCHITZ_BOUND), float(DISTORTION_BOUND)

    def embed(self, node: str, m: int | None = None) -> LpBlockVector:
        if len(node) > self.max_depth:
            raise ValueError(f"node depth {len(node)} exceeds max_depth {self.max_depth}")
        return embed_lp(node, self.p, self.iso, m, exact=self.exact)

    def _row_uncached(self, node: str) -> np.ndarray:
        if len(node) > self.max_depth:
            raise ValueError(f"node depth {len(node)} exceeds max_depth {self.max_depth}")
        row = np.zeros(self.width, dtype=np.int64 if self.exact else np.float64)
        if not node:
            return row
        m, lam = lambda_weight(len(node))
        for blk, weight in ((m, lam), (m + 1, 1 - lam)):
            if not weight:
                continue
            off = block_offset(blk)
            entries = self.iso.scaled_entries(blk)
            if self.exact:
                # weight * entry * 2^40 with weight = a / 2^m, entry = e / 2^33
                shift = 40 - _ENTRY_BITS - (weight.denominator.bit_length() - 1)
                for i, c in enumerate(node):
                    v = (weight.numerator * entries[i]) << shift
                    row[off + i] = v if c == "+" else -v
            else:
                w = float(weight)
                for i, c in enumerate(node):
                    v = w * (entries[i] / float(1 << _ENTRY_BITS))
                    row[off + i] = v if c == "+" else -v
        row.flags.writeable = False
        return row

    def rows(self, nodes: Sequence[str]) -> np.ndarray:
        return np.stack([self._row(n) for n in nodes]) if nodes else np.zeros((0, self.width))

    def distances(self, a: Sequence[str], b: Sequence[str]) -> np.ndarray:
        """Embedded distances; int64 numerators over :attr:`scale` when exact."""
        diff = self.rows(a) - self.rows(b)
        if self.exact:
            return np.abs(diff).sum(axis=1)
        return (np.abs(diff) ** self.p).sum(axis=1) ** (1.0 / self.p)

    def norm(self, node: str):
        """||f(node)||: an exact Fraction for p == 1, a float otherwise."""
        row = self._row(node)
        if self.exact:
            return Fraction(int(np.abs(row).sum()), self.scale)
        return float((np.abs(row) ** self.p).sum() ** (1.0 / self.p))
