"""Uniform adapters around each embedding for the auditor.

Every construction exposes ``distances(a, b)`` returning two numpy arrays:
source (tree) distances and embedded distances.  Exact constructions return
integers, with embedded distances expressed as numerators over ``scale``;
the others return float64.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .hyperbolic import HyperbolicEmbedding
from .james import JamesSystem, block_depth, bourgain_vector, parse_theta
from .lp import DiagonalIso, LpEmbedding, tree_dp
from .stepped import scaled_sup_distance
from .tree import MAX_DEPTH, ancestor_set, rho

CONSTRUCTIONS = ("l1-isometric", "bourgain", "hyperbolic", "lp")


class Construction:
    name: str
    exact: bool
    scale: int = 1
    max_depth: int

    def params(self) -> dict:
        raise NotImplementedError

    def bounds(self) -> tuple:
        """(Lipschitz bound, co-Lipschitz bound, distortion bound)."""
        raise NotImplementedError

    def distances(self, a: Sequence[str], b: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def embed_json(self, node: str):
        raise NotImplementedError

    def check_depth(self, node: str) -> None:
        if len(node) > self.max_depth:
            raise ValueError(f"node {node!r} is deeper than {self.name} max depth {self.max_depth}")

    def __reduce__(self):
        return build_construction, (self.name, self.params())


class L1Isometric(Construction):
    """node -> sum of basis vectors e_s over its ancestors s, in l_1(T)."""

    name = "l1-isometric"
    exact = True

    def __init__(self, max_depth: int = MAX_DEPTH):
        self.max_depth = max_depth
        self._anc = lru_cache(maxsize=1 << 16)(ancestor_set)

    def params(self) -> dict:
        return {"depth": self.max_depth}

    def bounds(self):
        return Fraction(1), Fraction(1), Fraction(1)

    def distances(self, a, b):
        anc = self._anc
        tree = [rho(x, y) for x, y in zip(a, b)]
        emb = [len(anc(x) ^ anc(y)) for x, y in zip(a, b)]
        return np.array(tree, dtype=np.int64), np.array(emb, dtype=np.int64)

    def embed_json(self, node):
        self.check_depth(node)
        return {"support": sorted(ancestor_set(node), key=lambda s: (len(s), s))}


class BourgainFinite(Construction):
    """Bourgain's map f_n of the finite tree T_(2^(n+1)) into block n."""

    name = "bourgain"
    exact = True

    def __init__(self, theta=Fraction(1), block: int = 0, max_depth: int | None = None):
        self.system = JamesSystem(parse_theta(theta))
        self.block = block
        limit = block_depth(block)
        self.max_depth = limit if max_depth is None else max_depth
        if self.max_depth > limit:
            raise ValueError(f"block {block} embeds depth <= {limit}, got depth {self.max_depth}")
        self._vec = lru_cache(maxsize=1 << 16)(lambda node: bourgain_vector(block, node))

    def params(self) -> dict:
        return {"theta": str(self.system.theta), "block": self.block, "depth": self.max_depth}

    def bounds(self):
        theta = self.system.theta
        return Fraction(1), theta / 3, 3 / theta

    def distances(self, a, b):
        vec = self._vec
        tree = [rho(x, y) for x, y in zip(a, b)]
        emb = [scaled_sup_distance(vec(x), 1, vec(y), 1) for x, y in zip(a, b)]
        return np.array(tree, dtype=np.int64), np.array(emb, dtype=np.int64)

    def embed_json(self, node):
        self.check_depth(node)
        return {str(self.block): self._vec(node).to_json()}


class Hyperbolic(Construction):
    name = "hyperbolic"
    exact = True

    def __init__(self, theta=Fraction(1), max_depth: int = MAX_DEPTH):
        self.embedding = HyperbolicEmbedding(JamesSystem(parse_theta(theta)), max_depth)
        self.max_depth = max_depth
        self.scale = self.embedding.scale

    def params(self) -> dict:
        return {"theta": str(self.embedding.theta), "depth": self.max_depth}

    def bounds(self):
        return self.embedding.bounds()

    def distances(self, a, b):
        dist = self.embedding.scaled_distance
        tree = [rho(x, y) for x, y in zip(a, b)]
        emb = [dist(x, y) for x, y in zip(a, b)]
        return np.array(tree, dtype=np.int64), np.array(emb, dtype=np.int64)

    def embed_json(self, node):
        return self.embedding.embed(node).to_json()


class Lp(Construction):
    name = "lp"

    def __init__(self, p: float = 2.0, iso: str = "identity", seed: int = 0, max_depth: int = MAX_DEPTH):
        self.embedding = LpEmbedding(p, DiagonalIso(iso, seed), max_depth)
        self.max_depth = max_depth
        self.exact = self.embedding.exact
        self.scale = self.embedding.scale if self.exact else 1

    def params(self) -> dict:
        iso = self.embedding.iso
        return {"p": self.embedding.p, "iso": iso.mode, "seed": iso.seed, "depth": self.max_depth}

    def bounds(self):
        return self.embedding.bounds()

    def distances(self, a, b):
        p = self.embedding.p
        if self.exact:
            tree = np.array([tree_dp(x, y, 1) for x, y in zip(a, b)], dtype=np.int64)
        else:
            tree = np.array([tree_dp(x, y, p) for x, y in zip(a, b)], dtype=np.float64)
        return tree, self.embedding.distances(a, b)

    def embed_json(self, node):
        return self.embedding.embed(node).to_json()


def build_construction(name: str, params: dict) -> Construction:
    params = dict(params)
    depth = params.pop("depth", MAX_DEPTH)
    if name == "l1-isometric":
        return L1Isometric(depth)
    if name == "bourgain":
        return BourgainFinite(params.get("theta", "1"), params.get("block", 0), depth)
    if name == "hyperbolic":
        return Hyperbolic(params.get("theta", "1"), depth)
    if name == "lp":
        return Lp(params.get("p", 2.0), params.get("iso", "identity"), params.get("seed", 0), depth)
    raise ValueError(f"unknown construction {name!r}; expected one of {CONSTRUCTIONS}")
