import json
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import SCALE, dense_bourgain, dense_scaled
from treembed.stepped import (
    BlockVector,
    SteppedVector,
    block_combine,
    block_sup_distance,
    combine,
    coord,
    iter_breakpoint_probes,
    step_from_indices,
    summing_vector,
    sup_norm,
)

LIMIT = 2**12


def random_vector(rng: random.Random, limit: int = LIMIT) -> SteppedVector:
    cuts = sorted(rng.sample(range(1, limit + 1), rng.randint(0, 6)))
    vals = [Fraction(rng.randint(-6, 6), rng.choice([1, 2, 3, 4, 8])) for _ in cuts]
    return SteppedVector.from_segments(zip(cuts, vals))


def dense(v: SteppedVector, length: int = LIMIT + 2) -> list[Fraction]:
    return v.to_dense(length)


def assert_canonical(v: SteppedVector):
    assert all(a < b for a, b in zip(v.ups, v.ups[1:]))
    assert all(a != b for a, b in zip(v.nums, v.nums[1:]))
    assert not v.nums or v.nums[-1] != 0
    assert v.den > 0
    if v.nums:
        from math import gcd
        g = v.den
        for n in v.nums:
            g = gcd(g, n)
        assert g == 1
    else:
        assert v.den == 1


def test_summing_vector_examples():
    assert summing_vector(1).is_zero()
    x3 = summing_vector(3)
    assert dense(x3, 4) == [1, 1, 0, 0]
    assert sup_norm(x3) == 1
    assert dense(summing_vector(7), 8) == [1] * 6 + [0, 0]
    with pytest.raises(ValueError):
        summing_vector(0)


def test_combine_examples():
    x3, x5 = summing_vector(3), summing_vector(5)
    assert dense(combine(1, x5, -1, x3), 16) == [0, 0, 1, 1] + [0] * 12
    assert combine(0, x5, 0, x3).is_zero()
    assert combine(Fraction(1, 2), x3, Fraction(1, 2), x3) == x3


def test_sup_norm_and_coord_examples():
    assert sup_norm(SteppedVector.zero()) == 0
    for j in (2, 3, 100, 2**70):
        assert sup_norm(summing_vector(j)) == 1
    x3 = summing_vector(3)
    assert coord(x3, 2) == 1
    assert coord(x3, 3) == 0
    assert coord(SteppedVector.zero(), 5) == 0
    with pytest.raises(ValueError):
        coord(x3, 0)


def test_sup_norm_of_bourgain_difference_at_depth_2():
    from treembed.james import bourgain_vector

    assert sup_norm(bourgain_vector(0, "--") - bourgain_vector(0, "++")) == 2
    ref = [a - b for a, b in zip(dense_bourgain(0, "--"), dense_bourgain(0, "++"))]
    assert max(abs(x) for x in ref) == 2


def test_dense_scaled_agrees_with_fraction_dense():
    rng = random.Random(7)
    for _ in range(50):
        v = random_vector(rng)
        assert dense_scaled(v, LIMIT + 2).tolist() == [x * SCALE for x in dense(v)]


def test_dense_oracle_equivalence():
    rng = random.Random(20240517)
    for _ in range(10_000):
        u, v = random_vector(rng), random_vector(rng)
        alpha = Fraction(rng.randint(-5, 5), rng.randint(1, 6))
        beta = Fraction(rng.randint(-5, 5), rng.randint(1, 6))
        w = combine(alpha, u, beta, v)
        # alpha * 60 and each dense entry * 24 are integers
        ref = int(alpha * 60) * (dense_scaled(u, LIMIT + 2) // 60) + int(beta * 60) * (dense_scaled(v, LIMIT + 2) // 60)
        assert_canonical(w)
        assert len(w.ups) <= len(u.ups) + len(v.ups)
        assert np.array_equal(dense_scaled(w, LIMIT + 2), ref)
        assert sup_norm(w) * SCALE == int(np.abs(ref).max())
        k = rng.randint(1, LIMIT + 2)
        assert coord(w, k) * SCALE == int(ref[k - 1])
        assert coord(w, k) == alpha * coord(u, k) + beta * coord(v, k)


segments_st = st.lists(
    st.tuples(st.integers(1, 200), st.fractions(min_value=-5, max_value=5, max_denominator=6)),
    max_size=8,
    unique_by=lambda t: t[0],
).map(lambda xs: SteppedVector.from_segments(sorted(xs)))


@given(segments_st, segments_st, st.fractions(max_denominator=8), st.fractions(max_denominator=8))
def test_canonical_form_closure(u, v, a, b):
    assert_canonical(u)
    assert_canonical(combine(a, u, b, v))
    assert_canonical(u - v)
    assert_canonical(-u)


@given(segments_st)
def test_coord_bounded_by_sup_norm(v):
    norm = sup_norm(v)
    for k in iter_breakpoint_probes(v):
        assert abs(coord(v, k)) <= norm


@given(segments_st, segments_st)
def test_json_round_trip(u, v):
    assert SteppedVector.from_json(json.loads(json.dumps(u.to_json()))) == u
    bv = BlockVector({0: u, 3: v})
    assert BlockVector.from_json(json.loads(json.dumps(bv.to_json()))) == bv


def test_json_breakpoints_are_strings():
    big = summing_vector(2**100)
    data = big.to_json()
    assert data == [[str(2**100 - 1), 1, 1]]


def test_step_from_indices_matches_sum_of_summing_vectors():
    rng = random.Random(3)
    for _ in range(500):
        idx = sorted(rng.sample(range(1, 300), rng.randint(1, 10)))
        ref = SteppedVector.zero()
        for j in idx:
            ref = ref + summing_vector(j)
        assert step_from_indices(idx) == ref


@given(segments_st, segments_st, segments_st)
def test_block_norm_and_projection(a, b, c):
    v = BlockVector({0: a, 2: b, 5: c})
    assert v.norm() == max(sup_norm(a), sup_norm(b), sup_norm(c))
    for n in (0, 1, 2, 5):
        assert v.restrict(n).norm() <= v.norm()
    w = BlockVector({2: c})
    assert block_sup_distance(v, w) == block_combine(1, v, -1, w).norm()
    assert block_sup_distance(v, v) == 0
    assert 0 not in {n for n, blk in block_combine(1, v, -1, v).blocks.items()}
