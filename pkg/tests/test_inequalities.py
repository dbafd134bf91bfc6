import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from padicvt.core import Cell, OpenSetDecomposition, PadicPoint, ball_at_zero, distance, index_to_point
from padicvt.corpus import random_step_function
from padicvt.inequalities import (
    CapacityProblem,
    ball_weight,
    capacity_minimizer,
    capacity_upper,
    check_capacity_inequality,
    check_fractional_sobolev,
    check_poincare,
    check_poincare_wirtinger,
    gagliardo_seminorm,
    rayleigh_minimum,
    rayleigh_sweep,
    seminorm_matrix,
    seminorm_squared,
    weighted_positivity,
)
from padicvt.operator import gamma_k
from padicvt.schwartz import StepFunction

seeds = st.integers(0, 2**32 - 1)


def brute_form(p, n, N, m, alpha):
    """Q from explicit pairwise distances between cell centres (exact arithmetic)."""
    K = N + m
    cells = list(np.ndindex(*((p**K,) * n)))
    pts = [index_to_point(c, p, N) for c in cells]
    cm = float(p) ** (-m * n)
    size = len(cells)
    Q = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            if i != j:
                w = cm * cm * float(distance(pts[i], pts[j])) ** (-(2 * alpha + n))
                Q[i, j] -= 2 * w
                Q[i, i] += 2 * w
    return Q


def brute_ball_seminorm(u: StepFunction, alpha: float) -> float:
    n = u.dimension
    Q = brute_form(u.prime, n, u.support_exp, u.scale, alpha)
    x = u.values.real.ravel()
    return float(x @ Q @ x)


def test_form_matches_pairwise_distances():
    for p, n, N, m in [(2, 1, 0, 3), (3, 1, 1, 1), (2, 2, 0, 2)]:
        assert np.allclose(seminorm_matrix(p, n, N, m, 0.4), brute_form(p, n, N, m, 0.4), rtol=1e-12, atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([2, 3]), st.integers(1, 2))
def test_ball_seminorm_against_pair_sum(seed, p, n):
    u = random_step_function(np.random.default_rng(seed), p, n, real=True, max_cells=27, support_range=(0, 1))
    N = u.support_exp
    assert seminorm_squared(u, 0.5, ball_at_zero(p, N, n)) == pytest.approx(brute_ball_seminorm(u, 0.5), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([2, 3, 5]), st.integers(1, 2), st.sampled_from([0.2, 0.5, 0.8]))
def test_seminorm_dual_route(seed, p, n, alpha):
    u = random_step_function(np.random.default_rng(seed), p, n, max_cells=256)
    assert gagliardo_seminorm(u, alpha).relative_gap <= 1e-9
    ball = ball_at_zero(p, u.support_exp, n)
    assert gagliardo_seminorm(u, alpha, ball).relative_gap <= 1e-9


def test_ball_weight_matches_sphere_sum():
    # A_N(p^k): pairs (x, y) with |x - y| = p^k, summed against the character
    p, n, N, alpha = 2, 1, 1, 0.5
    for k in (0, 1, 2):
        expected = 2 * (p ** (-2 * alpha * (1 - k)) + (1 - p ** (-n)) * sum(p ** (-2 * alpha * i) for i in range(2 - k, N + 1)))
        assert ball_weight(p, n, N, k, alpha) == pytest.approx(expected)


def test_seminorm_rejects_alpha_outside_unit_interval():
    u = StepFunction.indicator(ball_at_zero(2, 0))
    with pytest.raises(ValueError):
        gagliardo_seminorm(u, 1.0)


def smallest_mean_zero_eigenvalue(Q):
    """Projector route: the mean-zero spectrum of Q is the spectrum of P Q P minus one zero."""
    size = Q.shape[0]
    P = np.eye(size) - np.ones((size, size)) / size
    vals = np.sort(np.linalg.eigvalsh(P @ Q @ P))
    # the constants span the kernel of both P and Q, so drop that single zero
    return vals[vals > 1e-12 * vals[-1]][0]


@pytest.mark.parametrize("N,m", [(0, 1), (0, 2), (0, 3), (1, 2), (-1, 3)])
def test_rayleigh_minimum_against_projector_eigensolve(N, m):
    p, alpha = 2, 0.5
    cm = float(p) ** (-m)
    lam = smallest_mean_zero_eigenvalue(brute_form(p, 1, N, m, alpha)) / cm
    res = rayleigh_minimum(N, m, alpha, p)
    assert res.lambda_min == pytest.approx(lam, rel=1e-10)
    # closed form: 2 p^(-2 alpha N), independent of m
    assert res.lambda_min == pytest.approx(2 * p ** (-2 * alpha * N), rel=1e-10)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_poincare_wirtinger_tight_at_minimizer(m):
    res = rayleigh_minimum(0, m, 0.5)
    rep = check_poincare_wirtinger(res.minimizer, 0.5, 0)
    assert rep.empirical_constant == pytest.approx(res.best_constant, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_poincare_wirtinger_bounded_by_best_constant(seed):
    rng = np.random.default_rng(seed)
    u = StepFunction(2, 1, 0, 3, rng.normal(size=8))
    rep = check_poincare_wirtinger(u, 0.5, 0)
    assert rep.empirical_constant <= rayleigh_minimum(0, 3, 0.5).best_constant * (1 + 1e-12)


def kkt_capacity(Q, fixed):
    """min x^T Q x subject to x = 1 on fixed, via the saddle-point system."""
    size = Q.shape[0]
    B = np.eye(size)[fixed]
    k = B.shape[0]
    A = np.block([[Q, B.T], [B, np.zeros((k, k))]])
    rhs = np.concatenate([np.zeros(size), np.ones(k)])
    x = scipy.linalg.solve(A, rhs)[:size]
    return float(x @ Q @ x)


@pytest.mark.parametrize("N,m,cell_exp", [(0, 3, -2), (0, 2, -1), (1, 2, -1), (0, 3, -3)])
def test_capacity_against_kkt(N, m, cell_exp):
    p, alpha = 2, 0.5
    c = Cell(PadicPoint.zero(p), cell_exp)
    prob = CapacityProblem((c,), N, m, p)
    Q = seminorm_matrix(p, 1, N, m, alpha, "global-seminorm")
    fixed = np.zeros(p ** (N + m), dtype=bool)
    fixed[:: p ** (N - cell_exp)] = True
    assert capacity_upper(prob, alpha) == pytest.approx(kkt_capacity(Q, fixed), rel=1e-10)


def test_capacity_frozen_value():
    # e = B(0, 1/4) inside Z_2 at scale 3, global seminorm
    prob = CapacityProblem((Cell(PadicPoint.zero(2), -2),), 0, 3, 2)
    assert capacity_upper(prob, 0.5) == pytest.approx(0.6, rel=1e-12)
    u = capacity_minimizer(prob, 0.5)
    assert seminorm_squared(u, 0.5) == pytest.approx(0.6, rel=1e-10)
    assert np.all(u.values.real <= 1 + 1e-12) and np.all(u.values.real >= -1e-12)


def test_capacity_problem_validation():
    with pytest.raises(ValueError):
        CapacityProblem((Cell(PadicPoint.zero(2), 2),), 0, 3, 2)
    with pytest.raises(ValueError):
        CapacityProblem((Cell(PadicPoint.zero(2), -5),), 0, 3, 2)
    with pytest.raises(ValueError):
        CapacityProblem((), 0, 3, 2, variant="other")


def test_capacity_inequality_ratio():
    p = 2
    e = (Cell(PadicPoint.zero(p), -2),)
    # u lives on the half of Z_2 away from e (odd cells)
    vals = np.zeros(8)
    vals[[1, 3, 5, 7]] = [1.0, -0.5, 2.0, 0.3]
    u = StepFunction(p, 1, 0, 3, vals)
    rep = check_capacity_inequality(u, e, 0.5, 0)
    assert rep.passed and rep.empirical_constant > 0
    bad = StepFunction(p, 1, 0, 3, np.eye(8)[0])
    with pytest.raises(ValueError):
        check_capacity_inequality(bad, e, 0.5, 0)


def test_sobolev_and_poincare_reports():
    p = 3
    u = StepFunction.indicator(ball_at_zero(p, -1, 2), support_exp=0, scale=1)
    rep = check_fractional_sobolev(u, 0.5)
    assert rep.passed and rep.notes["exponent"] == pytest.approx(4.0)
    omega = OpenSetDecomposition(p, 2, (ball_at_zero(p, 0, 2),))
    assert check_poincare(u, 0.5, omega).passed
    small = OpenSetDecomposition(p, 2, (ball_at_zero(p, -2, 2),))
    with pytest.raises(ValueError):
        check_poincare(u, 0.5, small)
    assert check_fractional_sobolev(StepFunction.zeros(p, 2, 0, 0), 0.5).degenerate


def test_weighted_positivity_frozen_unit_ball():
    # u = 1_{Z_p}, n = 1: D u = (1 - 1/p) / (1 - p^(-alpha-1)) on Z_p and
    # integral over Z_p of |x|^(alpha-1) is (1 - 1/p) / (1 - p^(-alpha))
    p, alpha = 2, 0.5
    du = (1 - 1 / p) / (1 - p ** (-alpha - 1))
    w = (1 - 1 / p) / (1 - p ** (-alpha)) / gamma_k(alpha, p)
    u = StepFunction.indicator(ball_at_zero(p, 0), support_exp=0, scale=0)
    lhs, rhs = weighted_positivity(u, alpha)
    assert lhs == pytest.approx(2 * du * w, rel=1e-12)
    assert rhs == pytest.approx(lhs, rel=1e-12)
    assert lhs == pytest.approx(2.6408, abs=1e-4)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([2, 3]), st.integers(1, 2), st.sampled_from([0.3, 0.5, 0.9]))
def test_weighted_positivity_property(seed, p, n, alpha):
    u = random_step_function(np.random.default_rng(seed), p, n, real=True, max_cells=64)
    lhs, rhs = weighted_positivity(u, alpha)
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(rhs))
    assert lhs >= -1e-12
    assert math.isfinite(lhs)


def test_rayleigh_sweep_rows():
    rows = rayleigh_sweep(alphas=(0.5,), Ns=(-1, 0), ms=(1, 2), samples=10)
    # N = -1, m = 1 is a single cell and is skipped
    assert [(r[1], r[2]) for r in rows] == [(-1, 2), (0, 1), (0, 2)]
    for alpha, N, m, lam, ratio in rows:
        assert lam == pytest.approx(2 * 2 ** (-2 * alpha * N), rel=1e-10)
        assert ratio <= lam**-0.5 * (1 + 1e-12)
