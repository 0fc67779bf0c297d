"""A concrete James system in disjoint sup-norm blocks, and Bourgain's tree maps.

Block n carries the vectors x_{n,j} = e_1 + ... + e_{j-1} (1 <= j <= k_n) and
the functionals x*_{n,k} = theta * e*_k composed with the block restriction,
so that x*_{n,k}(x_{n,j}) is theta when k < j and 0 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .stepped import BlockVector, SteppedVector, coord, step_from_indices, summing_vector
from .tree import ancestor_indices, band, common_prefix_length, preorder_less, preorder_index

MAX_BLOCK = 6


def block_size(n: int) -> int:
    """k_n = 2^(2^(n+1)+1) - 1, the number of nodes of T_{2^(n+1)}."""
    return (1 << ((1 << (n + 1)) + 1)) - 1


def block_depth(n: int) -> int:
    """Depth of the finite tree Gamma_n = T_{2^(n+1)} embedded in block n."""
    return 1 << (n + 1)


def psi(n: int, node: str) -> int:
    """Psi_n: preorder index of ``node`` inside Gamma_n."""
    return preorder_index(node, block_depth(n))


def parse_theta(value: str | Fraction | int) -> Fraction:
    theta = Fraction(value)
    if not 0 < theta <= 1:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    return theta


@dataclass(frozen=True)
class JamesSystem:
    theta: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "theta", parse_theta(self.theta))

    def vector(self, n: int, j: int) -> BlockVector:
        _check_block(n)
        if not 1 <= j <= block_size(n):
            raise ValueError(f"x_{{{n},{j}}} is outside block {n} (1..{block_size(n)})")
        return BlockVector({n: summing_vector(j)})

    def functional(self, n: int, k: int, v: BlockVector) -> Fraction:
        return functional_eval(self, n, k, v)


def _check_block(n: int) -> None:
    if not 0 <= n <= MAX_BLOCK:
        raise ValueError(f"block index must be in 0..{MAX_BLOCK}, got {n}")


def bourgain_vector(n: int, node: str) -> SteppedVector:
    """Block-n component of f_n(node) = sum over ancestors s of x_{n, Psi_n(s)}."""
    _check_block(n)
    depth = block_depth(n)
    if len(node) > depth:
        raise ValueError(f"node of depth {len(node)} is too deep for block {n} (max {depth})")
    return step_from_indices(ancestor_indices(node, depth))


def bourgain_embed(system: JamesSystem, n: int, node: str) -> BlockVector:
    return BlockVector({n: bourgain_vector(n, node)})


def functional_eval(system: JamesSystem, n: int, k: int, v: BlockVector) -> Fraction:
    """x*_{n,k}(v) = theta * (k-th coordinate of the block-n part of v)."""
    _check_block(n)
    if not 1 <= k <= block_size(n):
        raise ValueError(f"functional index {k} outside block {n} (1..{block_size(n)})")
    return system.theta * coord(v.block(n), k)


def shared_bands(len_a: int, len_b: int) -> list[int]:
    """Every n with both lengths in the closed band [2^n, 2^(n+1)]."""
    if len_a < 1 or len_b < 1:
        return []
    out = []
    for n in {band(len_a), band(len_a) - 1}:
        if n >= 0 and all((1 << n) <= x <= (1 << (n + 1)) for x in (len_a, len_b)):
            out.append(n)
    return sorted(out)


def pair_identity_check(system: JamesSystem, eps: str, eps2: str, embed=None) -> list[tuple[str, Fraction, Fraction]]:
    """Evaluate the exact functional identities behind the same-band minoration.

    ``embed`` maps a node to its BlockVector image and defaults to the
    interpolated hyperbolic embedding.  The pair is reordered so the first
    node comes first in preorder.  Returns ``(name, expected, observed)``
    triples; for a correct embedding every ``expected == observed``.
    """
    if embed is None:
        from .hyperbolic import HyperbolicEmbedding

        embed = HyperbolicEmbedding(system).embed
    if preorder_less(eps2, eps):
        eps, eps2 = eps2, eps
    bands = [n for n in shared_bands(len(eps), len(eps2)) if n < MAX_BLOCK]
    if not bands:
        raise ValueError(f"nodes {eps!r} and {eps2!r} do not share a band")
    theta = system.theta
    c = common_prefix_length(eps, eps2)
    gca = eps[:c]
    d = len(eps) - c
    d2 = len(eps2) - c
    diff = embed(eps) - embed(eps2)
    out = []
    for n in bands:
        lam = Fraction((1 << (n + 1)) - len(eps), 1 << n)
        lam2 = Fraction((1 << (n + 1)) - len(eps2), 1 << n)
        out.append((
            f"n={n}: x*[n,gca] on block n",
            theta * (lam * d - lam2 * d2),
            functional_eval(system, n, psi(n, gca), diff),
        ))
        out.append((
            f"n={n}: x*[n+1,gca] on block n+1",
            theta * ((1 - lam) * d - (1 - lam2) * d2),
            functional_eval(system, n + 1, psi(n + 1, gca), diff),
        ))
        out.append((
            f"n={n}: -x*[n,eps] on block n",
            theta * lam2 * d2,
            -functional_eval(system, n, psi(n, eps), diff),
        ))
        out.append((
            f"n={n}: -x*[n+1,eps] on block n+1",
            theta * (1 - lam2) * d2,
            -functional_eval(system, n + 1, psi(n + 1, eps), diff),
        ))
    return out
