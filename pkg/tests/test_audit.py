import json
import math
from collections import Counter
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from treembed.audit import (
    Entry,
    ExhaustivePairs,
    Partial,
    SampledPairs,
    audit,
    build_report,
    exhaustive_pairs,
    iter_pairs,
    run_scan,
    sample_pair,
    sample_pairs,
    scan,
    stratum_of,
    verify_bounds,
)
from treembed.constructions import CONSTRUCTIONS, L1Isometric, build_construction
from treembed.tree import enumerate_nodes, rho


class Stretched(L1Isometric):
    """l_1 embedding with the pair ('', '-') stretched by 3/2."""

    def distances(self, a, b):
        tree, emb = super().distances(a, b)
        emb = emb * 2
        for i, (x, y) in enumerate(zip(a, b)):
            if {x, y} == {"", "-"}:
                emb[i] = 3
        return tree, emb

    @property
    def scale(self):
        return 2


def test_exhaustive_counts():
    assert len(exhaustive_pairs(1)) == 3
    assert len(exhaustive_pairs(2)) == 21
    assert len(exhaustive_pairs(10)) == 2_094_081
    with pytest.raises(ValueError):
        ExhaustivePairs(13)


def test_exhaustive_pairs_cover_every_pair_once():
    for depth in range(4):
        pairs = list(ExhaustivePairs(depth))
        want = {frozenset(p) for p in combinations(enumerate_nodes(depth), 2)}
        assert len(pairs) == len(want) == math.comb(2 ** (depth + 1) - 1, 2)
        assert {frozenset(p) for p in pairs} == want
        assert pairs == list(ExhaustivePairs(depth))


def test_exhaustive_slices_concatenate():
    src = ExhaustivePairs(5)
    pairs = list(src)
    a, b = [], []
    for start in range(0, len(src), 97):
        x, y = src.slice(start, start + 97)
        a += x
        b += y
    assert list(zip(a, b)) == pairs


def test_sampling_deterministic():
    one = list(sample_pairs(32, 2000, seed=5))
    assert one == list(sample_pairs(32, 2000, seed=5))
    assert one != list(sample_pairs(32, 2000, seed=6))
    assert one[17] == sample_pair(32, 5, 17)
    x, y = SampledPairs(32, 2000, 5).slice(100, 200)
    assert list(zip(x, y)) == one[100:200]
    with pytest.raises(ValueError):
        sample_pairs(8, 0)


@pytest.mark.parametrize("depth", [2, 8, 32, 64])
def test_sampled_pairs_valid(depth):
    for a, b in sample_pairs(depth, 5000, seed=1):
        assert a != b
        assert len(a) <= depth and len(b) <= depth
        assert set(a + b) <= {"+", "-"}


def test_stratum_quotas():
    counts = Counter(stratum_of(a, b) for a, b in sample_pairs(32, 100_000, seed=0))
    for stratum in ("same-band", "adjacent-band", "distant-band"):
        assert counts[stratum] >= 20_000, counts


def test_sampled_gca_spread():
    # close pairs (deep common ancestor relative to the shorter node) are well represented
    pairs = list(sample_pairs(32, 10_000, seed=0))
    close = sum(1 for a, b in pairs if min(len(a), len(b)) >= 4 and rho(a, b) <= 4)
    assert close > 100


def test_l1_exact_isometry():
    report = audit(L1Isometric(5), ExhaustivePairs(5))
    assert report.lip_sup.ratio == report.colip_inf.ratio == report.distortion == 1
    assert isinstance(report.distortion, Fraction)
    assert report.pairs_checked == math.comb(63, 2)
    assert verify_bounds(report).passed
    # all ratios tie, so the witness is the lexicographically smallest pair
    assert report.lip_sup.key == min(tuple(sorted(p)) for p in combinations(map(str, enumerate_nodes(5)), 2))


def test_synthetic_violation():
    report = audit(Stretched(3), ExhaustivePairs(3))
    verdict = verify_bounds(report)
    assert not verdict.passed and verdict.exit_code == 1
    assert len(verdict.violations) == 1
    v = verdict.violations[0]
    assert (v["nodeA"], v["nodeB"], v["bound"]) == ("", "-", "lipschitz")
    assert report.lip_sup.ratio == Fraction(3, 2) > report.bound_lip


def test_passing_verdict():
    report = audit(L1Isometric(2), ExhaustivePairs(2))
    assert verify_bounds(report).exit_code == 0


@pytest.mark.parametrize("name", CONSTRUCTIONS)
def test_violations_iff_bounds_breached(name):
    params = {"depth": 4, "theta": "1/2", "block": 1, "p": 1.5, "iso": "random", "seed": 2}
    c = build_construction(name, params)
    report = audit(c, ExhaustivePairs(4))
    ok = report.lip_sup.ratio <= report.bound_lip and report.colip_inf.ratio >= report.bound_colip
    assert ok == (not report.violations)
    assert ok
    if c.exact:
        assert report.distortion == report.lip_sup.ratio / report.colip_inf.ratio
    else:
        assert report.distortion == pytest.approx(report.lip_sup.ratio / report.colip_inf.ratio, rel=1e-12)
    assert report.distortion <= report.bound_distortion


def _partial(entries_seed):
    rng = np.random.default_rng(entries_seed)
    nodes = [str(n) for n in enumerate_nodes(4)]
    c = build_construction("hyperbolic", {"depth": 4})
    idx = rng.choice(len(nodes), size=(40, 2))
    pairs = [(nodes[i], nodes[j]) for i, j in idx if i != j]
    return scan(c, [a for a, _ in pairs], [b for _, b in pairs])


def test_merge_commutative_associative():
    p, q, r = (_partial(s) for s in range(3))
    assert p.merge(q) == q.merge(p)
    assert p.merge(q).merge(r) == p.merge(q.merge(r))
    assert p.merge(Partial()) == p


@given(st.lists(st.tuples(st.fractions(0, 10), st.text("+-", max_size=3), st.text("+-", max_size=3)), max_size=30),
       st.integers(0, 30))
def test_merge_split_invariance(items, cut):
    entries = [Entry(r, (a, b), 1, r) for r, a, b in items]

    def part(es):
        return Partial(len(es), Partial().merge(Partial(0, es, es)).top_max, Partial(0, [], es).merge(Partial()).top_min)

    whole = part(entries)
    assert part(entries[:cut]).merge(part(entries[cut:])) == whole


def test_worker_and_chunk_invariance():
    c = build_construction("hyperbolic", {"depth": 6, "theta": "9/10"})
    src = ExhaustivePairs(6)
    ref = build_report(c, src, run_scan(c, src, workers=1)).to_json()
    for workers in (1, 4, 8):
        for chunk in (333, 4096):
            got = build_report(c, src, run_scan(c, src, workers=workers, chunk=chunk)).to_json()
            assert json.dumps(got, sort_keys=True) == json.dumps(ref, sort_keys=True)


def test_report_json_fields():
    c = build_construction("lp", {"depth": 4, "p": 2.0, "iso": "half"})
    data = audit(c, ExhaustivePairs(4)).to_json()
    for key in ("construction", "params", "pairs_checked", "lip_sup", "colip_inf", "distortion", "bound_lip",
                "bound_colip", "bound_distortion", "violations", "worst_pairs"):
        assert key in data
    assert len(data["worst_pairs"]) <= 10
    assert data["params"]["iso"] == "half"
    exact = audit(L1Isometric(2), ExhaustivePairs(2)).to_json()
    assert exact["distortion"] == {"num": "1", "den": "1", "float": 1.0}


def test_depth_guard():
    with pytest.raises(ValueError):
        audit(L1Isometric(2), ExhaustivePairs(3))


def test_iter_pairs_limit():
    assert len(list(iter_pairs(sample_pairs(16, 100), 7))) == 7
