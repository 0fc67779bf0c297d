"""Invariant and identity suites run by ``verify`` on top of the pairwise audit."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator

import numpy as np

from .constructions import BourgainFinite, Construction, Hyperbolic, L1Isometric, Lp
from .hyperbolic import HyperbolicEmbedding
from .james import JamesSystem, block_depth, block_size, bourgain_vector, functional_eval, pair_identity_check
from .lp import DiagonalIso, LpEmbedding, block_dim, embed_lp, lp_sum_distance, phi
from .sampling import BitStream, counter_bits
from .stepped import sup_norm
from .tree import ancestor_set, band, dp_dist, enumerate_nodes, rho


@dataclass
class CheckResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, message: str) -> None:
        if len(self.failures) < 20:
            self.failures.append(message)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checked": self.checked, "failures": self.failures}


def sample_branches(depth: int, count: int, seed: int = 0) -> Iterator[str]:
    """``count`` random root-to-leaf paths of length ``depth`` (pure in seed and index)."""
    for i in range(count):
        bits = BitStream(counter_bits(seed, -1 - i, nbytes=16))
        yield format(bits.take(depth), f"0{depth}b").replace("0", "-").replace("1", "+") if depth else ""


def audited_nodes(depth: int, exhaustive_depth: int = 10, branches: int = 10_000, seed: int = 0) -> Iterator[str]:
    """All nodes up to ``exhaustive_depth`` plus every prefix of sampled branches below ``depth``."""
    top = min(depth, exhaustive_depth)
    yield from (str(n) for n in enumerate_nodes(top))
    if depth > top:
        for leaf in sample_branches(depth, branches, seed):
            for k in range(top + 1, depth + 1):
                yield leaf[:k]


# ---------------------------------------------------------------------------
# hyperbolic


def norm_sandwich(embedding: HyperbolicEmbedding, nodes: Iterable[str]) -> CheckResult:
    """(theta/24)|node| <= ||f(node)|| <= |node|."""
    res = CheckResult("hyperbolic norm sandwich (theta/24)|e| <= ||f(e)|| <= |e|")
    lo = embedding.theta / 24
    for node in nodes:
        norm = embedding.embed(node).norm()
        res.checked += 1
        if not lo * len(node) <= norm <= len(node):
            res.fail(f"{node!r}: ||f|| = {norm}")
    return res


def boundary_consistency(embed: Callable, depth: int, exhaustive_depth: int = 10, samples: int = 200, seed: int = 0,
                         name: str = "band boundary agreement") -> CheckResult:
    """At |e| = 2^(n+1) both neighbouring band formulas give the same vector."""
    res = CheckResult(name)
    for length in (1 << k for k in range(1, 7)):
        if length > depth:
            break
        n = band(length) - 1
        if length <= exhaustive_depth:
            nodes = (str(x) for x in enumerate_nodes(length) if len(x) == length)
        else:
            nodes = sample_branches(length, samples, seed + length)
        for node in nodes:
            res.checked += 1
            lower = embed(node, n)
            upper = embed(node, n + 1)
            if _as_comparable(lower) != _as_comparable(upper):
                res.fail(f"{node!r}: band {n} and band {n + 1} images differ")
    return res


def _as_comparable(v):
    if hasattr(v, "to_json"):
        return v.to_json()
    return v


def block_support(embedding: HyperbolicEmbedding, nodes: Iterable[str]) -> CheckResult:
    res = CheckResult("block support within {n, n+1}")
    for node in nodes:
        res.checked += 1
        if not node:
            if not embedding.embed(node).is_zero():
                res.fail("root image is nonzero")
            continue
        n = band(len(node))
        if not embedding.embed(node).support() <= {n, n + 1}:
            res.fail(f"{node!r}: support {sorted(embedding.embed(node).support())}")
    return res


def same_band_pairs(depth: int) -> Iterator[tuple[str, str]]:
    """Every unordered pair (including equal nodes) of nonroot nodes sharing a closed band."""
    for n in range(0, band(depth) + 1):
        lo, hi = 1 << n, min(1 << (n + 1), depth)
        nodes = [str(x) for x in enumerate_nodes(hi) if lo <= len(x)]
        for i, a in enumerate(nodes):
            for b in nodes[i:]:
                yield a, b


def minoration_identities(system: JamesSystem, depth: int = 8) -> CheckResult:
    """Exact functional identities for every same-band pair up to ``depth``."""
    res = CheckResult("same-band functional identities (exact)")
    embedding = HyperbolicEmbedding(system, max(depth, 1))
    cached = lru_cache(maxsize=None)(embedding.embed)
    seen = set()
    for a, b in same_band_pairs(depth):
        if (a, b) in seen:
            continue
        seen.add((a, b))
        for name, expected, observed in pair_identity_check(system, a, b, cached):
            res.checked += 1
            if expected != observed:
                res.fail(f"({a!r}, {b!r}) {name}: expected {expected}, observed {observed}")
    return res


# ---------------------------------------------------------------------------
# bourgain


def james_relations(system: JamesSystem, n: int) -> CheckResult:
    """x*_{n,k}(x_{n,j}) = theta [k < j] for all 1 <= k, j <= k_n."""
    res = CheckResult(f"James relations in block {n}")
    size = block_size(n)
    theta = system.theta
    for j in range(1, size + 1):
        x = system.vector(n, j)
        if sup_norm(x.block(n)) > 1:
            res.fail(f"||x_{n},{j}|| > 1")
        for k in range(1, size + 1):
            res.checked += 1
            want = theta if k < j else 0
            if functional_eval(system, n, k, x) != want:
                res.fail(f"x*_{n},{k}(x_{n},{j}) != {want}")
    return res


def bourgain_norm_bound(n: int, nodes: Iterable[str]) -> CheckResult:
    res = CheckResult(f"||f_{n}(e)|| <= |e| in block {n}")
    for node in nodes:
        res.checked += 1
        norm = sup_norm(bourgain_vector(n, node))
        if norm > len(node):
            res.fail(f"{node!r}: ||f_{n}|| = {norm}")
    return res


# ---------------------------------------------------------------------------
# l_p


def lp_norm_bounds(embedding: LpEmbedding, nodes: Iterable[str]) -> CheckResult:
    """(1/16)|e|^(1/p) <= ||f(e)|| <= |e|^(1/p); exact at p = 1."""
    p = embedding.p
    res = CheckResult(f"l_p norm sandwich |e|^(1/p)/16 <= ||f(e)|| <= |e|^(1/p) (p={p:g})")
    tol = 1e-9
    for node in nodes:
        res.checked += 1
        norm = embedding.norm(node)
        if embedding.exact:
            ok = Fraction(len(node), 16) <= norm <= len(node)
        else:
            target = len(node) ** (1.0 / p)
            ok = target / 16 * (1 - tol) <= norm <= target * (1 + tol)
        if not ok:
            res.fail(f"{node!r}: ||f|| = {norm}")
    return res


def iso_sandwich(iso: DiagonalIso, p: float, blocks: Iterable[int], cases: int = 10_000, seed: int = 0) -> CheckResult:
    """(1/2)||u||_p <= ||R u||_p <= ||u||_p on random vectors."""
    res = CheckResult(f"iso sandwich ({iso.mode}, p={p:g})")
    rng = np.random.default_rng(seed)
    for m in blocks:
        entries = iso.entries(m)
        u = rng.standard_normal((cases, block_dim(m)))
        base = (np.abs(u) ** p).sum(axis=1) ** (1 / p)
        mapped = (np.abs(u * entries) ** p).sum(axis=1) ** (1 / p)
        res.checked += cases
        bad = np.flatnonzero((mapped < 0.5 * base * (1 - 1e-9)) | (mapped > base * (1 + 1e-9)))
        for i in bad[:5]:
            res.fail(f"block {m} case {i}: ||u|| = {base[i]}, ||Ru|| = {mapped[i]}")
        if not np.all((entries >= 0.5) & (entries <= 1)):
            res.fail(f"block {m}: diagonal entries outside [1/2, 1]")
    return res


def phi_isometry(depth: int, ps: Iterable[float] = (1, 2, 3)) -> CheckResult:
    """d_p(a, b) == ||phi(a) - phi(b)||_p on all pairs of T_depth."""
    res = CheckResult(f"phi isometry on T_{depth}")
    nodes = [str(x) for x in enumerate_nodes(depth)]
    vecs = {x: phi(x, depth) for x in nodes}
    for p in ps:
        for i, a in enumerate(nodes):
            for b in nodes[i + 1:]:
                res.checked += 1
                d = dp_dist(a, b, p)
                diff = [x - y for x, y in zip(vecs[a], vecs[b])]
                if p == 1:
                    ok = d == sum(abs(x) for x in diff)
                else:
                    norm = sum(abs(x) ** p for x in diff) ** (1 / p)
                    ok = abs(d - norm) <= 1e-9 * max(norm, 1)
                if not ok:
                    res.fail(f"p={p}: ({a!r}, {b!r})")
    return res


# ---------------------------------------------------------------------------
# l_1


def l1_symdiff(depth: int) -> CheckResult:
    res = CheckResult(f"|anc(a) ^ anc(b)| == rho(a, b) on T_{depth}")
    nodes = [str(x) for x in enumerate_nodes(depth)]
    anc = {x: ancestor_set(x) for x in nodes}
    for i, a in enumerate(nodes):
        if len(anc[a]) != len(a) + 1:
            res.fail(f"{a!r}: ancestor set of size {len(anc[a])}")
        for b in nodes[i:]:
            res.checked += 1
            if len(anc[a] ^ anc[b]) != rho(a, b):
                res.fail(f"({a!r}, {b!r})")
    return res


def suite_for(construction: Construction, branches: int = 10_000, seed: int = 0) -> list[CheckResult]:
    """The invariant suite matching a construction's parameters."""
    depth = construction.max_depth
    if isinstance(construction, L1Isometric):
        return [l1_symdiff(min(depth, 6))]
    if isinstance(construction, BourgainFinite):
        n = construction.block
        out = [bourgain_norm_bound(n, audited_nodes(min(depth, block_depth(n)), 10, branches, seed))]
        if n <= 2:
            out.append(james_relations(construction.system, n))
        return out
    if isinstance(construction, Hyperbolic):
        emb = construction.embedding
        return [
            norm_sandwich(emb, audited_nodes(depth, 10, branches, seed)),
            block_support(emb, audited_nodes(depth, 10, min(branches, 1000), seed)),
            boundary_consistency(emb.embed, depth),
            minoration_identities(emb.system, min(depth, 8)),
        ]
    if isinstance(construction, Lp):
        emb = construction.embedding
        top = band(depth) + 1 if depth else 0
        return [
            lp_norm_bounds(emb, audited_nodes(depth, 10, branches, seed)),
            boundary_consistency(
                lambda node, m: embed_lp(node, emb.p, emb.iso, m, exact=emb.exact), depth,
                name="l_p band boundary agreement",
            ),
            iso_sandwich(emb.iso, emb.p, range(top + 1), cases=2_000, seed=seed),
            phi_isometry(min(depth, 6), (emb.p,)),
        ]
    raise TypeError(f"no invariant suite for {construction!r}")


def lp_distance_matches_dense(embedding: LpEmbedding, pairs: Iterable[tuple[str, str]]) -> CheckResult:
    """Layout-based distances agree with the block-wise LpBlockVector formula."""
    res = CheckResult("l_p dense layout agrees with block formula")
    pairs = list(pairs)
    dense = embedding.distances([a for a, _ in pairs], [b for _, b in pairs])
    for (a, b), d in zip(pairs, dense):
        res.checked += 1
        ref = lp_sum_distance(embedding.embed(a), embedding.embed(b), embedding.p)
        if embedding.exact:
            ok = Fraction(int(d), embedding.scale) == ref
        else:
            ok = abs(float(d) - ref) <= 1e-9 * max(ref, 1)
        if not ok:
            res.fail(f"({a!r}, {b!r}): {d} vs {ref}")
    return res
