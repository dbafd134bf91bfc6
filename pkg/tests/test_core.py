from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from padicvt.core import (
    Ball,
    BallRelation,
    Cell,
    OpenSetDecomposition,
    PadicPoint,
    TailAmbiguousError,
    TailDescriptor,
    abs_value,
    annulus_complement_measure,
    ball_at_zero,
    ball_relation,
    boundary_accumulation_points,
    decode_coordinate,
    decomposition_from_json,
    decomposition_to_json,
    distance,
    encode_coordinate,
    haar_measure,
    index_to_point,
    point_from_json,
    point_to_index,
    point_to_json,
    valuation,
)

primes = st.sampled_from([2, 3, 5, 7])
rationals = st.fractions(max_denominator=10_000).filter(lambda x: x != 0)


def brute_valuation(x: Fraction, p: int) -> int:
    # independent route: count powers of p in numerator and denominator via repeated division
    v = 0
    while x.numerator % p == 0:
        x /= p
        v += 1
    while x.denominator % p == 0:
        x *= p
        v -= 1
    return v


def test_valuation_known_values():
    assert valuation(12, 2) == 2
    assert valuation(Fraction(1, 9), 3) == -2
    assert valuation(Fraction(5, 7), 5) == 1
    with pytest.raises(ValueError):
        valuation(0, 2)


@given(rationals, primes)
def test_valuation_matches_brute_force(x, p):
    assert valuation(x, p) == brute_valuation(x, p)


def test_abs_value_is_exact_fraction():
    x = PadicPoint.from_rational([Fraction(1, 4), 6], 2)
    assert abs_value(x) == Fraction(4)
    assert type(abs_value(x)) is Fraction
    assert abs_value(PadicPoint.zero(3, 2)) == 0


@given(rationals, rationals, primes)
def test_strong_triangle_inequality(a, b, p):
    x = PadicPoint.from_rational(a, p)
    y = PadicPoint.from_rational(b, p)
    z = x + y
    assert abs_value(z) <= max(abs_value(x), abs_value(y))
    if abs_value(x) != abs_value(y):
        assert abs_value(z) == max(abs_value(x), abs_value(y))


@given(rationals, rationals, primes)
def test_distance_symmetric_and_matches_valuation(a, b, p):
    x, y = PadicPoint.from_rational(a, p), PadicPoint.from_rational(b, p)
    assert distance(x, y) == distance(y, x)
    if a != b:
        assert distance(x, y) == Fraction(p) ** (-valuation(a - b, p))


def test_from_rational_digits_roundtrip():
    x = PadicPoint.from_rational([Fraction(7, 4), 0], 2)
    assert x.exact
    assert x.to_rationals() == (Fraction(7, 4), Fraction(0))
    # 1/3 has an infinite 2-adic expansion
    assert not PadicPoint.from_rational(Fraction(1, 3), 2).exact


def test_point_rejects_bad_digits():
    with pytest.raises(ValueError):
        PadicPoint(2, ((0, (2,)),))
    with pytest.raises(ValueError):
        PadicPoint(3, ((0, (1, 0)),))


def test_ball_relation_cases():
    p = 3
    big = ball_at_zero(p, 1)
    small = Ball(PadicPoint.from_rational(3, p), -1)
    other = Ball(PadicPoint.from_rational(1, p), -1)
    assert ball_relation(big, small) is BallRelation.A_CONTAINS_B
    assert ball_relation(small, big) is BallRelation.B_CONTAINS_A
    assert ball_relation(small, other) is BallRelation.DISJOINT
    assert ball_relation(small, Ball(PadicPoint.from_rational(12, p), -1)) is BallRelation.EQUAL


@settings(max_examples=200)
@given(primes, st.integers(0, 80), st.integers(0, 80), st.integers(-2, 2), st.integers(-2, 2))
def test_balls_nested_or_disjoint(p, a, b, ra, rb):
    x = Ball(PadicPoint.from_rational(a, p), ra)
    y = Ball(PadicPoint.from_rational(b, p), rb)
    rel = ball_relation(x, y)
    # every point of the smaller ball belongs to the larger one when they are not disjoint
    small, large = (x, y) if ra <= rb else (y, x)
    if rel is BallRelation.DISJOINT:
        assert not large.contains_point(small.center)
    else:
        assert large.contains_point(small.center)


@given(primes, st.integers(1, 2), st.integers(-3, 3))
def test_children_partition_measure(p, n, r):
    cell = Cell(PadicPoint.zero(p, n), r)
    kids = cell.children()
    assert len(kids) == p**n
    assert sum((haar_measure(k) for k in kids), Fraction(0)) == haar_measure(cell)
    for i, a in enumerate(kids):
        assert cell.contains(a)
        for b in kids[i + 1 :]:
            assert ball_relation(a, b) is BallRelation.DISJOINT


def test_haar_measure_values():
    assert haar_measure(ball_at_zero(2, 3)) == 8
    assert haar_measure(ball_at_zero(3, -1, 2)) == Fraction(1, 9)


def test_decomposition_rejects_overlap():
    p = 2
    with pytest.raises(ValueError):
        OpenSetDecomposition(p, 1, (ball_at_zero(p, 0), ball_at_zero(p, -1)))


def test_annulus_complement_measure_sphere():
    p = 2
    # omega = the unit sphere |x| = 1, i.e. B(0,1) minus B(0,1/2)
    sphere = Ball(PadicPoint.from_rational(1, p), -1)
    omega = OpenSetDecomposition(p, 1, (sphere,))
    assert annulus_complement_measure(omega, Fraction(1), Fraction(1, 2)) == 0
    assert annulus_complement_measure(omega, Fraction(2), Fraction(1)) == 1
    assert annulus_complement_measure(omega, Fraction(2), Fraction(1, 4)) == Fraction(1) + Fraction(1, 4)


def test_annulus_tail_ambiguity():
    p = 2
    tail = TailDescriptor(PadicPoint.zero(p), -3, None)
    omega = OpenSetDecomposition(p, 1, (), tail=tail)
    with pytest.raises(TailAmbiguousError):
        annulus_complement_measure(omega, Fraction(1, 4), Fraction(1, 16))
    # annulus above the tail is unaffected
    assert annulus_complement_measure(omega, Fraction(1), Fraction(1, 8)) == Fraction(7, 8)


def test_boundary_accumulation_at_zero():
    p = 2
    spheres = tuple(Ball(PadicPoint.from_rational(Fraction(1, 1) * 2**j, p), -j - 1) for j in range(6))
    omega = OpenSetDecomposition(p, 1, spheres)
    pts = boundary_accumulation_points(omega, resolution=2)
    assert len(pts) == 1 and pts[0].is_zero()


def test_grid_index_roundtrip():
    p, M, K = 3, 1, 3
    for a in [0, 1, 5, 26]:
        pt = index_to_point((a,), p, M)
        assert point_to_index(pt, M, K) == (a,)
    with pytest.raises(ValueError):
        point_to_index(PadicPoint.from_rational(Fraction(1, 9), p), M, K)


@given(primes, st.integers(-5, 5), st.lists(st.integers(0, 6), min_size=0, max_size=5))
def test_coordinate_encoding_roundtrip(p, v, raw):
    digits = [d % p for d in raw]
    while digits and digits[-1] == 0:
        digits.pop()
    while digits and digits[0] == 0:
        digits.pop(0)
        v += 1
    text = encode_coordinate(v, digits, p)
    back = decode_coordinate(text, p)
    assert back == ((v, tuple(digits)) if digits else (0, ()))


def test_point_json_roundtrip_large_prime():
    x = PadicPoint.from_rational([Fraction(12, 11), 3], 11)
    assert point_from_json(point_to_json(x), 11) == x


def test_decomposition_json_roundtrip():
    p = 3
    omega = OpenSetDecomposition(p, 1, (ball_at_zero(p, -1), Ball(PadicPoint.from_rational(1, p), -2)), hypothesis="boundary")
    back = decomposition_from_json(decomposition_to_json(omega))
    assert back == omega
