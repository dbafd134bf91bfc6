import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from padicvt.core import Ball, OpenSetDecomposition, PadicPoint, ball_at_zero, index_to_point
from padicvt.corpus import random_step_function
from padicvt.schwartz import (
    RadialKernel,
    StepFunction,
    ball_sums,
    character,
    fourier,
    integrate,
    inverse_fourier,
    l2_norm,
    radial_tail_sum,
    restrict,
    sphere_volume,
    step_function_from_json,
    step_function_to_json,
    translate,
)

seeds = st.integers(0, 2**32 - 1)
primes = st.sampled_from([2, 3, 5])


def small_function(seed, p, n=1, real=False, max_cells=64):
    return random_step_function(np.random.default_rng(seed), p, n, real, max_cells)


def brute_fourier(f: StepFunction) -> np.ndarray:
    """Character sum over cells: F f(xi) = sum_c f(c) chi(c xi) p**(-m n)."""
    p, n = f.prime, f.dimension
    out = np.zeros(f.values.shape, dtype=complex)
    for b in np.ndindex(*f.values.shape):
        xi = index_to_point(b, p, f.scale)
        total = 0j
        for a in np.ndindex(*f.values.shape):
            if f.values[a] != 0:
                total += f.values[a] * character(index_to_point(a, p, f.support_exp), xi)
        out[b] = total * f.cell_measure
    return out


def test_character_trivial_on_integers():
    assert character(PadicPoint.from_rational(7, 3)) == pytest.approx(1)
    assert character(PadicPoint.from_rational(Fraction(1, 2), 2)) == pytest.approx(-1)


def test_indicator_of_unit_ball_is_self_dual():
    f = StepFunction.indicator(ball_at_zero(3, 0), support_exp=1, scale=1)
    g = fourier(f)
    # F 1_{Z_p} = 1_{Z_p}
    expected = StepFunction.indicator(ball_at_zero(3, 0), support_exp=1, scale=1)
    assert np.allclose(g.regrid(1, 1).values, expected.values)


@settings(max_examples=25, deadline=None)
@given(seeds, primes, st.integers(1, 2))
def test_fourier_matches_character_sum(seed, p, n):
    f = small_function(seed, p, n, max_cells=27 if n == 2 else 64)
    assert np.allclose(fourier(f).values, brute_fourier(f), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds, primes, st.integers(1, 2))
def test_fourier_inversion_and_plancherel(seed, p, n):
    f = small_function(seed, p, n, max_cells=256)
    g = fourier(f)
    back = inverse_fourier(g)
    assert np.max(np.abs(back.values - f.values)) <= 1e-10 * max(1.0, np.max(np.abs(f.values)))
    assert math.isclose(l2_norm(g), l2_norm(f), rel_tol=1e-12)


def test_integral_of_radial_tail():
    # |x|^{-2} outside Z_2 integrates to (1/2) sum_{j>=1} 2^{-j} = 1/2
    f = StepFunction.zeros(2, 1, 0, 0).with_values(np.zeros(1), RadialKernel(1.0, -2.0))
    assert integrate(f) == pytest.approx(0.5)
    assert radial_tail_sum(2, 1, -1.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        radial_tail_sum(2, 0, 0.5)
    assert sphere_volume(3, 2, 1) == pytest.approx(9 * (1 - 1 / 9))


def test_ball_sums_against_loops():
    rng = np.random.default_rng(0)
    p, n, level = 2, 2, 1
    vals = rng.normal(size=(8, 8))
    sums = ball_sums(vals, p, n, level)
    step = p**level  # radius p^(M - level) means the indices agree mod p^level
    for a in np.ndindex(8, 8):
        expected = sum(vals[b] for b in np.ndindex(8, 8) if all((bi - ai) % step == 0 for ai, bi in zip(a, b)))
        assert sums[a] == pytest.approx(expected)


@settings(max_examples=30, deadline=None)
@given(seeds, primes, st.integers(1, 2))
def test_regrid_and_canonical_preserve_values(seed, p, n):
    f = small_function(seed, p, n)
    g = f.regrid(f.support_exp + 1, f.scale + 1)
    assert integrate(g) == pytest.approx(integrate(f))
    c = g.canonical()
    assert c.levels <= f.levels
    assert np.allclose(c.regrid(f.support_exp + 1, f.scale + 1).values, g.values)


def test_point_evaluation():
    p = 3
    ball = Ball(PadicPoint.from_rational(1, p), -1)
    f = StepFunction.indicator(ball, support_exp=0, scale=2)
    assert f(PadicPoint.from_rational(4, p)) == 1
    assert f(PadicPoint.from_rational(2, p)) == 0
    assert f(PadicPoint.from_rational(Fraction(1, 3), p)) == 0


@settings(max_examples=30, deadline=None)
@given(seeds, primes)
def test_translation_modulates_fourier(seed, p):
    f = small_function(seed, p, 1)
    a = PadicPoint.from_rational(Fraction(1, p), p)
    t = translate(f, a)
    ft, ff = fourier(t), fourier(f.regrid(t.support_exp, t.scale))
    # F(tau_a f)(xi) = chi(a xi) F f(xi)
    phases = np.array([character(a, index_to_point((b,), p, ft.support_exp)) for b in range(ft.values.shape[0])])
    assert np.allclose(ft.values, phases * ff.values, atol=1e-12)


def test_restrict_to_domain():
    p = 2
    omega = OpenSetDecomposition(p, 1, (ball_at_zero(p, -1),))
    f = StepFunction.indicator(ball_at_zero(p, 0), support_exp=0, scale=2)
    r = restrict(f, omega)
    assert integrate(r) == pytest.approx(0.5)


@settings(max_examples=30, deadline=None)
@given(seeds, primes, st.integers(1, 2))
def test_json_roundtrip(seed, p, n):
    f = small_function(seed, p, n)
    f = f.with_values(f.values, RadialKernel(1.5 - 0.5j, -1.3))
    back = step_function_from_json(step_function_to_json(f))
    assert back.grid_key() == f.grid_key()
    assert np.array_equal(back.values, f.values)
    assert back.tail == f.tail


def test_shape_validation():
    with pytest.raises(ValueError):
        StepFunction(2, 1, 0, 1, np.zeros(3))
