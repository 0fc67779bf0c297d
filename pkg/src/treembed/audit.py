"""Pairwise distortion audits with exact extrema and reproducible witnesses.

A pair stream is cut into fixed-size chunks.  Each chunk is scanned into a
:class:`Partial` (top-K largest and smallest ratios, bound violations), and
partials merge associatively and commutatively, so a report depends only on
the parameters, never on the number of workers.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import islice
from multiprocessing import get_context
from typing import Iterator

import numpy as np

from .constructions import Construction
from .sampling import BitStream, counter_bits
from .tree import MAX_DEPTH, band, enumerate_nodes, node_count

EXHAUSTIVE_MAX_DEPTH = 12
TOP_K = 10
MAX_VIOLATIONS = 100
CHUNK = 1 << 16
FLOAT_RTOL = 1e-9

STRATA = ("same-band", "same-band", "adjacent-band", "distant-band", "uniform")


# ---------------------------------------------------------------------------
# pair sources


@lru_cache(maxsize=4)
def _nodes(depth: int) -> tuple[str, ...]:
    return tuple(str(n) for n in enumerate_nodes(depth))


def pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class ExhaustivePairs:
    """Every unordered pair of distinct nodes of T_depth, row-major over preorder."""

    depth: int

    def __post_init__(self):
        if not 0 <= self.depth <= EXHAUSTIVE_MAX_DEPTH:
            raise ValueError(f"exhaustive mode needs depth <= {EXHAUSTIVE_MAX_DEPTH}, got {self.depth}")

    def __len__(self) -> int:
        n = node_count(self.depth)
        return n * (n - 1) // 2

    def describe(self) -> dict:
        return {"mode": "exhaustive", "depth": self.depth}

    def slice(self, start: int, stop: int) -> tuple[list[str], list[str]]:
        nodes = _nodes(self.depth)
        n = len(nodes)
        stop = min(stop, len(self))
        # row i holds n - 1 - i pairs and starts at i*n - i*(i+1)/2
        i = 0
        lo, hi = 0, n - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if mid * n - mid * (mid + 1) // 2 <= start:
                lo = mid
            else:
                hi = mid - 1
        i = lo
        j = i + 1 + start - (i * n - i * (i + 1) // 2)
        a: list[str] = []
        b: list[str] = []
        k = start
        while k < stop:
            take = min(n - j, stop - k)
            a.extend([nodes[i]] * take)
            b.extend(nodes[j:j + take])
            k += take
            i += 1
            j = i + 1
        return a, b

    def __iter__(self) -> Iterator[tuple[str, str]]:
        nodes = _nodes(self.depth)
        for i, x in enumerate(nodes):
            for y in nodes[i + 1:]:
                yield x, y


def exhaustive_pairs(depth: int) -> ExhaustivePairs:
    return ExhaustivePairs(depth)


def _band_range(n: int, depth: int) -> tuple[int, int]:
    return 1 << n, min((1 << (n + 1)) - 1, depth)


def _signs(bits: BitStream, length: int) -> str:
    if not length:
        return ""
    return format(bits.take(length), f"0{length}b").replace("0", "-").replace("1", "+")


def sample_pair(depth: int, seed: int, i: int) -> tuple[str, str]:
    """Pair number ``i`` of the stratified stream; a pure function of its arguments.

    Pairs cycle through strata by ``i mod 5``: two same-band slots, then
    adjacent bands, bands at least two apart, and uniform depths.  The
    common-prefix length is drawn uniformly so that close pairs (deep common
    ancestors) are as frequent as far ones.
    """
    bits = BitStream(counter_bits(seed, i, nbytes=64))
    top = band(depth)
    stratum = STRATA[i % len(STRATA)]
    if stratum == "adjacent-band" and top < 1 or stratum == "distant-band" and top < 2:
        stratum = "uniform"
    if stratum == "same-band":
        n = bits.between(0, top)
        la = bits.between(*_band_range(n, depth))
        lb = bits.between(*_band_range(n, depth))
    elif stratum == "adjacent-band":
        n = bits.between(0, top - 1)
        la = bits.between(*_band_range(n, depth))
        lb = bits.between(*_band_range(n + 1, depth))
    elif stratum == "distant-band":
        n = bits.between(0, top - 2)
        q = bits.between(n + 2, top)
        la = bits.between(*_band_range(n, depth))
        lb = bits.between(*_band_range(q, depth))
    else:
        la = bits.between(0, depth)
        lb = bits.between(0, depth)
        if la == lb == 0:
            lb = 1
    if bits.take(1):
        la, lb = lb, la
    c = bits.between(0, min(la, lb))
    if la == lb == c:
        c -= 1
    a = _signs(bits, la)
    rest = _signs(bits, lb - c)
    if c < la and rest:
        # force the branches to split exactly below the common prefix
        rest = ("+" if a[c] == "-" else "-") + rest[1:]
    return a, a[:c] + rest


@dataclass(frozen=True)
class SampledPairs:
    depth: int
    count: int
    seed: int = 0

    def __post_init__(self):
        if self.count <= 0:
            raise ValueError("sample count must be positive")
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"sampled mode needs 1 <= depth <= {MAX_DEPTH}, got {self.depth}")

    def __len__(self) -> int:
        return self.count

    def describe(self) -> dict:
        return {"mode": "sampled", "depth": self.depth, "samples": self.count, "seed": self.seed}

    def slice(self, start: int, stop: int) -> tuple[list[str], list[str]]:
        a: list[str] = []
        b: list[str] = []
        for i in range(start, min(stop, self.count)):
            x, y = sample_pair(self.depth, self.seed, i)
            a.append(x)
            b.append(y)
        return a, b

    def __iter__(self) -> Iterator[tuple[str, str]]:
        for i in range(self.count):
            yield sample_pair(self.depth, self.seed, i)


def sample_pairs(depth: int, count: int, seed: int = 0) -> SampledPairs:
    return SampledPairs(depth, count, seed)


def stratum_of(a: str, b: str) -> str:
    if not a or not b:
        return "root"
    gap = abs(band(len(a)) - band(len(b)))
    return ("same-band", "adjacent-band")[gap] if gap < 2 else "distant-band"


# ---------------------------------------------------------------------------
# scanning


@dataclass(frozen=True)
class Entry:
    ratio: Fraction | float
    key: tuple[str, str]
    tree: Fraction | float
    emb: Fraction | float


@dataclass
class Partial:
    pairs: int = 0
    top_max: list[Entry] = field(default_factory=list)
    top_min: list[Entry] = field(default_factory=list)
    violations: list[tuple[Fraction | float, Entry, str]] = field(default_factory=list)
    violation_count: int = 0

    def merge(self, other: "Partial") -> "Partial":
        return Partial(
            self.pairs + other.pairs,
            _best(self.top_max + other.top_max, largest=True),
            _best(self.top_min + other.top_min, largest=False),
            _worst_violations(self.violations + other.violations),
            self.violation_count + other.violation_count,
        )


def _best(entries: list[Entry], largest: bool) -> list[Entry]:
    if largest:
        return heapq.nsmallest(TOP_K, entries, key=lambda e: (-e.ratio, e.key))
    return heapq.nsmallest(TOP_K, entries, key=lambda e: (e.ratio, e.key))


def _worst_violations(items):
    return heapq.nsmallest(MAX_VIOLATIONS, items, key=lambda v: (-v[0], v[1].key))


def _exact_entry(a: str, b: str, tree: int, emb: int, scale: int) -> Entry:
    return Entry(Fraction(emb, scale * tree), pair_key(a, b), Fraction(tree), Fraction(emb, scale))


def _float_entry(a: str, b: str, tree: float, emb: float) -> Entry:
    return Entry(emb / tree, pair_key(a, b), tree, emb)


def _ratio_floats(construction: Construction, tree: np.ndarray, emb: np.ndarray) -> np.ndarray:
    if construction.exact:
        # ints below 2^53 convert exactly, and correctly rounded division is
        # monotone: exact order implies (weak) float order
        if tree.size and (int(emb.max()) >= 1 << 53 or int(tree.max()) * construction.scale >= 1 << 53):
            raise OverflowError("distance numerators too large for the float prefilter")
        return emb.astype(np.float64) / (tree.astype(np.float64) * float(construction.scale))
    return emb / tree


def _exact_sign(emb: np.ndarray, tree: np.ndarray, scale: int, bound: Fraction) -> np.ndarray:
    """Sign of emb / (scale * tree) - bound, elementwise and exact."""
    lhs_max = int(emb.max()) * bound.denominator
    rhs_max = bound.numerator * scale * int(tree.max())
    if max(lhs_max, rhs_max) < 1 << 62:
        return np.sign(emb * bound.denominator - tree * (bound.numerator * scale))
    e = emb.astype(object)
    t = tree.astype(object)
    return np.sign((e * bound.denominator - t * (bound.numerator * scale)).astype(object)).astype(np.int64)


class _Batch:
    def __init__(self, construction: Construction, a: list[str], b: list[str]):
        self.a = a
        self.b = b
        self.exact = construction.exact
        self.scale = construction.scale
        self.tree, self.emb = construction.distances(a, b)
        if np.any(self.tree <= 0):
            bad = int(np.argmin(self.tree))
            raise ValueError(f"pair ({a[bad]!r}, {b[bad]!r}) is not a pair of distinct nodes")
        self.ratio = _ratio_floats(construction, self.tree, self.emb)

    def entry(self, i: int) -> Entry:
        if self.exact:
            return _exact_entry(self.a[i], self.b[i], int(self.tree[i]), int(self.emb[i]), self.scale)
        return _float_entry(self.a[i], self.b[i], float(self.tree[i]), float(self.emb[i]))

    def select(self, idx: np.ndarray, k: int, largest: bool) -> list[Entry]:
        """The k best of ``idx`` by (ratio, key), ratio descending when ``largest``.

        Candidates are grouped by exact value first, so large groups of tied
        ratios only cost a key comparison each.
        """
        if not len(idx):
            return []
        if self.exact:
            num = self.emb[idx]
            den = self.tree[idx] * self.scale
            g = np.gcd(num, den)
            values = np.stack([num // g, den // g], axis=1)
            uniq, inverse = np.unique(values, axis=0, return_inverse=True)
            keyed = [(Fraction(int(n), int(d)), u) for u, (n, d) in enumerate(uniq)]
        else:
            uniq, inverse = np.unique(self.ratio[idx], return_inverse=True)
            keyed = [(float(v), u) for u, v in enumerate(uniq)]
        inverse = inverse.reshape(-1)
        keyed.sort(key=lambda t: t[0], reverse=largest)
        out: list[Entry] = []
        for _, u in keyed:
            members = idx[inverse == u]
            a, b = self.a, self.b
            chosen = heapq.nsmallest(k - len(out), ((pair_key(a[i], b[i]), i) for i in members.tolist()))
            out.extend(self.entry(i) for _, i in chosen)
            if len(out) >= k:
                break
        return out


def scan(construction: Construction, a: list[str], b: list[str]) -> Partial:
    """Scan one batch of pairs into a Partial."""
    for x in (a, b):
        for node in x:
            if len(node) > construction.max_depth:
                construction.check_depth(node)
    if not a:
        return Partial()
    batch = _Batch(construction, a, b)
    ratio = batch.ratio
    k = min(TOP_K, len(a))
    kth_max = np.partition(ratio, -k)[-k]
    kth_min = np.partition(ratio, k - 1)[k - 1]
    top_max = batch.select(np.flatnonzero(ratio >= kth_max), TOP_K, largest=True)
    top_min = batch.select(np.flatnonzero(ratio <= kth_min), TOP_K, largest=False)

    lip, colip, _ = construction.bounds()
    if construction.exact:
        over = _exact_sign(batch.emb, batch.tree, batch.scale, lip) > 0
        under = _exact_sign(batch.emb, batch.tree, batch.scale, colip) < 0
    else:
        over = ratio > lip * (1 + FLOAT_RTOL)
        under = ratio < colip * (1 - FLOAT_RTOL)
    count = int(over.sum() + under.sum())
    violations = []
    if count:
        for e in batch.select(np.flatnonzero(over), MAX_VIOLATIONS, largest=True):
            violations.append((e.ratio / lip, e, "lipschitz"))
        for e in batch.select(np.flatnonzero(under), MAX_VIOLATIONS, largest=False):
            violations.append((colip / e.ratio, e, "co-lipschitz"))
    return Partial(len(a), top_max, top_min, _worst_violations(violations), count)


def _scan_chunk(args) -> Partial:
    construction, source, start, stop = args
    a, b = source.slice(start, stop)
    return scan(construction, a, b)


def run_scan(construction: Construction, source, workers: int = 1, chunk: int = CHUNK) -> Partial:
    total = len(source)
    jobs = [(construction, source, s, min(s + chunk, total)) for s in range(0, total, chunk)]
    result = Partial()
    if workers <= 1 or len(jobs) <= 1:
        for job in jobs:
            result = result.merge(_scan_chunk(job))
        return result
    with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("fork")) as pool:
        for part in pool.map(_scan_chunk, jobs):
            result = result.merge(part)
    return result


# ---------------------------------------------------------------------------
# reports


@dataclass
class DistortionReport:
    construction: str
    params: dict
    pairs_checked: int
    lip_sup: Entry | None
    colip_inf: Entry | None
    distortion: Fraction | float | None
    bound_lip: Fraction | float
    bound_colip: Fraction | float
    bound_distortion: Fraction | float
    violations: list[dict]
    violation_count: int
    worst_pairs: list[Entry]
    exact: bool = True

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def to_json(self) -> dict:
        def witness(e: Entry | None):
            if e is None:
                return None
            return {"value": number_json(e.ratio), "witness": list(e.key)}

        return {
            "construction": self.construction,
            "params": self.params,
            "pairs_checked": self.pairs_checked,
            "lip_sup": witness(self.lip_sup),
            "colip_inf": witness(self.colip_inf),
            "distortion": number_json(self.distortion),
            "bound_lip": number_json(self.bound_lip),
            "bound_colip": number_json(self.bound_colip),
            "bound_distortion": number_json(self.bound_distortion),
            "violations": self.violations,
            "violation_count": self.violation_count,
            "worst_pairs": [worst_pair_row(e, json=True) for e in self.worst_pairs],
        }


def number_json(x):
    if x is None:
        return None
    if isinstance(x, Fraction):
        return {"num": str(x.numerator), "den": str(x.denominator), "float": float(x)}
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def worst_pair_row(e: Entry, json: bool = False) -> dict:
    conv = number_json if json else (lambda v: float(v) if isinstance(v, Fraction) else v)
    return {
        "nodeA": e.key[0],
        "nodeB": e.key[1],
        "tree_dist": conv(e.tree),
        "embedded_dist": conv(e.emb),
        "ratio": conv(e.ratio),
    }


def _extremity(e: Entry, lip, colip):
    return max(e.ratio / lip, colip / e.ratio)


def build_report(construction: Construction, source, partial: Partial) -> DistortionReport:
    lip, colip, dist_bound = construction.bounds()
    lip_sup = partial.top_max[0] if partial.top_max else None
    colip_inf = partial.top_min[0] if partial.top_min else None
    distortion = lip_sup.ratio / colip_inf.ratio if lip_sup else None
    seen = set()
    worst = []
    for e in sorted(partial.top_max + partial.top_min, key=lambda e: (-_extremity(e, lip, colip), e.key)):
        if e.key not in seen:
            seen.add(e.key)
            worst.append(e)
    violations = [
        {"bound": kind, "severity": number_json(sev), **worst_pair_row(e, json=True)}
        for sev, e, kind in partial.violations
    ]
    params = {**construction.params(), **source.describe()}
    return DistortionReport(
        construction.name,
        params,
        partial.pairs,
        lip_sup,
        colip_inf,
        distortion,
        lip,
        colip,
        dist_bound,
        violations,
        partial.violation_count,
        worst[:TOP_K],
        construction.exact,
    )


def audit(construction: Construction, source, workers: int = 1) -> DistortionReport:
    return build_report(construction, source, run_scan(construction, source, workers))


@dataclass
class Verdict:
    passed: bool
    violations: list[dict]

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


def verify_bounds(report: DistortionReport) -> Verdict:
    return Verdict(report.violation_count == 0 and not report.violations, list(report.violations))


def iter_pairs(source, limit: int | None = None):
    return islice(iter(source), limit)
