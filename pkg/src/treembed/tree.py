"""Binary tree nodes, the tree metrics rho and d_p, and preorder enumeration.

A node is a finite sign sequence, encoded as a string over ``-`` and ``+``
(the root is the empty string).  :class:`TreeNode` is a validated ``str``
subclass, so nodes hash, compare and slice like plain strings.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

MAX_DEPTH = 64

_SIGN_CHARS = {-1: "-", 1: "+"}
_CHAR_SIGNS = {"-": -1, "+": 1}


class TreeNode(str):
    """A node of the infinite binary tree, e.g. ``TreeNode("+-")``."""

    __slots__ = ()

    def __new__(cls, encoding: str = "") -> "TreeNode":
        if isinstance(encoding, TreeNode):
            return encoding
        if not isinstance(encoding, str):
            raise TypeError(f"node encoding must be a string, got {type(encoding).__name__}")
        if encoding.strip("+-"):
            raise ValueError(f"node encoding may only contain '-' and '+': {encoding!r}")
        if len(encoding) > MAX_DEPTH:
            raise ValueError(f"node depth {len(encoding)} exceeds maximum {MAX_DEPTH}")
        return super().__new__(cls, encoding)

    @classmethod
    def from_signs(cls, signs: Iterable[int]) -> "TreeNode":
        try:
            return cls("".join(_SIGN_CHARS[s] for s in signs))
        except KeyError as exc:
            raise ValueError(f"signs must be -1 or +1, got {exc.args[0]!r}") from None

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(_CHAR_SIGNS[c] for c in self)

    @property
    def depth(self) -> int:
        return len(self)

    @property
    def parent(self) -> "TreeNode":
        if not self:
            raise ValueError("the root has no parent")
        return TreeNode(self[:-1])

    def children(self) -> tuple["TreeNode", "TreeNode"]:
        return TreeNode(self + "-"), TreeNode(self + "+")

    def is_ancestor_of(self, other: str) -> bool:
        """True when ``other`` extends ``self`` (a node is its own ancestor)."""
        return other.startswith(self)

    def __repr__(self) -> str:
        return f"TreeNode({str(self)!r})"


ROOT = TreeNode("")


def as_node(value: str | Sequence[int]) -> TreeNode:
    if isinstance(value, str):
        return TreeNode(value)
    return TreeNode.from_signs(value)


def common_prefix_length(a: str, b: str) -> int:
    n = min(len(a), len(b))
    if a[:n] == b[:n]:
        return n
    lo, hi = 0, n
    # a[:lo] == b[:lo] and a[:hi] != b[:hi]
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if a[:mid] == b[:mid]:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class AncestorInfo:
    gca: TreeNode
    d: int
    d_prime: int

    @property
    def rho(self) -> int:
        return self.d + self.d_prime


def gca_info(a: str, b: str) -> AncestorInfo:
    """Greatest common ancestor of two nodes and the lengths of both branches below it."""
    c = common_prefix_length(a, b)
    return AncestorInfo(TreeNode(a[:c]), len(a) - c, len(b) - c)


def rho(a: str, b: str) -> int:
    """Hyperbolic (graph) distance: |a| + |b| - 2|gca(a, b)|."""
    return len(a) + len(b) - 2 * common_prefix_length(a, b)


def hamming_and_tail(a: str, b: str) -> tuple[int, int]:
    """Count differing signs on the shared positions, and positions present in one node only."""
    m = min(len(a), len(b))
    diff = sum(1 for x, y in zip(a, b) if x != y) if a[:m] != b[:m] else 0
    return diff, len(a) + len(b) - 2 * m


def dp_dist(a: str, b: str, p: float) -> Fraction | float:
    """d_p distance of the zero-padded sign sequences.

    Exact (an integer-valued Fraction) for p == 1, floating point otherwise.
    """
    if p < 1:
        raise ValueError(f"d_p requires p >= 1, got {p}")
    diff, tail = hamming_and_tail(a, b)
    if p == 1:
        return Fraction(2 * diff + tail)
    return (diff * 2.0**p + tail) ** (1.0 / p)


def preorder_index(node: str, n: int) -> int:
    """Position of ``node`` in the preorder listing of T_n, starting at 1.

    The ``-`` child is visited before the ``+`` child, so a ``+`` step at
    depth d skips the whole ``-`` subtree of 2^(n-d) - 1 nodes.
    """
    if len(node) > n:
        raise ValueError(f"node of depth {len(node)} is not in T_{n}")
    idx = 1
    for d, c in enumerate(node):
        idx += 1 if c == "-" else 1 << (n - d)
    return idx


def ancestor_indices(node: str, n: int) -> list[int]:
    """Preorder indices (in T_n) of every ancestor of ``node``, root first.

    The list is strictly increasing, since ancestors precede descendants.
    """
    if len(node) > n:
        raise ValueError(f"node of depth {len(node)} is not in T_{n}")
    out = [1]
    idx = 1
    for d, c in enumerate(node):
        idx += 1 if c == "-" else 1 << (n - d)
        out.append(idx)
    return out


def subtree_size(depth: int, n: int) -> int:
    """Number of nodes of T_n below (and including) a node at ``depth``."""
    return (1 << (n - depth + 1)) - 1


def enumerate_nodes(depth: int) -> Iterator[TreeNode]:
    """Yield every node of T_depth in preorder (``-`` before ``+``)."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if depth > MAX_DEPTH:
        raise ValueError(f"depth {depth} exceeds maximum {MAX_DEPTH}")
    stack = [ROOT]
    while stack:
        node = stack.pop()
        yield node
        if len(node) < depth:
            stack.append(TreeNode(node + "+"))
            stack.append(TreeNode(node + "-"))


def node_count(depth: int) -> int:
    return (1 << (depth + 1)) - 1


def ancestor_set(node: str) -> frozenset[TreeNode]:
    """All prefixes of ``node``, root and ``node`` included."""
    return frozenset(TreeNode(node[:i]) for i in range(len(node) + 1))


def preorder_less(a: str, b: str) -> bool:
    """Strict preorder comparison; independent of the enumeration depth."""
    c = common_prefix_length(a, b)
    if c == len(a):
        return c < len(b)
    if c == len(b):
        return False
    return a[c] == "-"


def band(length: int) -> int:
    """Index n of the dyadic band 2^n <= length < 2^(n+1)."""
    if length < 1:
        raise ValueError("the root belongs to no band")
    return length.bit_length() - 1
