from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from oracles import dense_block_distance, dense_hyperbolic, preorder_listing
from treembed.checks import block_support, boundary_consistency, norm_sandwich
from treembed.hyperbolic import HyperbolicEmbedding, c0_distance, embed, lambda_weight
from treembed.james import JamesSystem, bourgain_vector
from treembed.stepped import BlockVector, combine
from treembed.tree import rho

THETAS = [Fraction(1), Fraction(9, 10), Fraction(1, 2)]


def test_lambda_examples():
    assert lambda_weight(1) == (0, 1)
    assert lambda_weight(3) == (1, Fraction(1, 2))
    assert lambda_weight(4) == (2, 1)
    assert lambda_weight(4, 1) == (1, 0)
    assert lambda_weight(7) == (2, Fraction(1, 4))
    with pytest.raises(ValueError):
        lambda_weight(0)
    with pytest.raises(ValueError):
        lambda_weight(5, 1)


@given(st.integers(1, 2**40))
def test_lambda_range(length):
    n, lam = lambda_weight(length)
    assert 2**n <= length < 2 ** (n + 1)
    assert 0 < lam <= 1
    assert lam.denominator & (lam.denominator - 1) == 0


def test_embed_examples():
    e = HyperbolicEmbedding()
    assert embed(e, "").is_zero()
    assert e("-") == BlockVector({0: bourgain_vector(0, "-")})
    half = Fraction(1, 2)
    f1, f2 = bourgain_vector(1, "+-+"), bourgain_vector(2, "+-+")
    assert e("+-+") == BlockVector({1: combine(half, f1, 0, f1), 2: combine(half, f2, 0, f2)})
    with pytest.raises(ValueError):
        HyperbolicEmbedding(max_depth=3)("++++")


def test_c0_distance_examples():
    e = HyperbolicEmbedding()
    v = e("+-+-")
    assert c0_distance(v, v) == 0
    assert c0_distance(e(""), e("-")) == 1
    # value fixed by the dense oracle at depth 2; rho = 4
    assert c0_distance(e("--"), e("++")) == 2
    assert e.distance("--", "++") == 2


def test_matches_dense_oracle():
    e = HyperbolicEmbedding(max_depth=4)
    nodes = preorder_listing(4)
    dense = {x: dense_hyperbolic(x) for x in nodes}
    for a, b in combinations(nodes, 2):
        assert e.distance(a, b) == dense_block_distance(dense[a], dense[b]), (a, b)


def test_scaled_distance_is_exact():
    e = HyperbolicEmbedding(max_depth=8)
    for a, b in combinations(preorder_listing(5), 2):
        assert e.distance(a, b) == c0_distance(e(a), e(b))


@pytest.mark.parametrize("theta", THETAS)
def test_distance_bounds_exhaustive_depth_6(theta):
    e = HyperbolicEmbedding(JamesSystem(theta), 6)
    lo = theta / 24
    for a, b in combinations(preorder_listing(6), 2):
        d = e.distance(a, b)
        r = rho(a, b)
        assert lo * r <= d <= 9 * r


deep = st.integers(0, 32).flatmap(lambda k: st.text("+-", min_size=k, max_size=k))


@settings(max_examples=300)
@given(deep, deep, st.sampled_from(THETAS))
def test_distance_bounds_property(a, b, theta):
    e = HyperbolicEmbedding(JamesSystem(theta), 32)
    d = e.distance(a, b)
    r = rho(a, b)
    assert theta / 24 * r <= d <= 9 * r


@given(deep, st.sampled_from(THETAS))
def test_norm_sandwich(node, theta):
    e = HyperbolicEmbedding(JamesSystem(theta), 32)
    norm = e(node).norm()
    assert theta / 24 * len(node) <= norm <= len(node)


def test_norm_bound_checks():
    e = HyperbolicEmbedding(JamesSystem(Fraction(1, 2)), 10)
    nodes = preorder_listing(10)
    assert norm_sandwich(e, nodes).passed
    assert block_support(e, nodes).passed


def test_boundary_consistency():
    e = HyperbolicEmbedding(max_depth=32)
    res = boundary_consistency(e.embed, 32, exhaustive_depth=8, samples=50)
    assert res.passed and res.checked > 0
    for node in ("+-", "++--", "-" * 8, "+" * 16):
        n = len(node).bit_length() - 2
        assert e.embed(node, n) == e.embed(node, n + 1) == e.embed(node)


def test_scale_clears_denominators():
    for depth in (1, 7, 8, 32, 64):
        e = HyperbolicEmbedding(max_depth=depth)
        node = "+" * depth
        assert all(e.scale % v.den == 0 for v in e(node).blocks.values())


def test_depth_64():
    e = HyperbolicEmbedding()
    a, b = "+" * 64, "-" * 64
    assert e.distance(a, b) >= Fraction(128, 24)
    assert e.distance(a, "+" * 63) <= 9
