import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from padicvt.checks import comparison_problems
from padicvt.core import Ball, Cell, OpenSetDecomposition, PadicPoint, ball_at_zero
from padicvt.dirichlet import (
    DirichletProblem,
    assemble_gram,
    comparison_check,
    energy,
    green_bound_check,
    green_matrix,
    green_numeric,
    pair_energy_radial,
    poisson_constant,
    poisson_extend_ball,
    radial_step,
    solve_dirichlet,
    solve_homogeneous,
)
from padicvt.operator import VTParams, apply_hypersingular, apply_spectral
from padicvt.schwartz import RadialKernel, StepFunction, integrate

seeds = st.integers(0, 2**32 - 1)


def unit_ball(p=2, n=1, r=0):
    return OpenSetDecomposition(p, n, (ball_at_zero(p, r, n),), hypothesis="boundary")


def test_gram_routes_agree_on_64_cells():
    omega = unit_ball(2, 1, 2)
    a = assemble_gram(omega, 4, 2, 0.5, "spectral")
    b = assemble_gram(omega, 4, 2, 0.5, "hypersingular")
    assert a.size == 64
    assert np.max(np.abs(a.gram - b.gram)) <= 1e-9 * np.max(np.abs(a.gram))
    assert np.allclose(a.gram, a.gram.T)
    assert np.all(np.linalg.eigvalsh(a.gram) > 0)


@pytest.mark.parametrize("p,n,alpha", [(3, 1, 0.3), (2, 2, 0.7), (5, 1, 1.4)])
def test_gram_routes_agree_other_params(p, n, alpha):
    omega = unit_ball(p, n, 0)
    a = assemble_gram(omega, 1, 0, alpha, "spectral")
    b = assemble_gram(omega, 1, 0, alpha, "hypersingular")
    assert np.allclose(a.gram, b.gram, rtol=1e-12, atol=0)


def test_unit_ball_gram_entry_frozen():
    # (1_{Z_2}, 1_{Z_2}) at alpha = 1/2 is the symbol integral over Z_2: (1/2) / (1 - 2^(-3/2))
    assert pair_energy_radial(2, 1, 0, 0.5, -np.inf) == pytest.approx(0.5 / (1 - 2**-1.5), rel=1e-14)
    assert pair_energy_radial(2, 1, 0, 0.5, -np.inf) == pytest.approx(0.77345908, abs=1e-8)


@pytest.mark.parametrize("m", [0, 1, 3, 5])
def test_constant_source_on_unit_ball(m):
    # D 1_{Z_2} is constant on Z_2, so u = 1_{Z_2} / 0.7734... is exact at every scale
    omega = unit_ball()
    f = StepFunction.indicator(ball_at_zero(2, 0), support_exp=0, scale=m)
    u, system = solve_dirichlet(DirichletProblem(omega, 0.5, f), m, 0)
    assert np.allclose(system.solution, (1 - 2**-1.5) / 0.5, rtol=1e-12)
    assert system.weak_residual() <= 1e-12


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([0.3, 0.5, 1.2]))
def test_solution_satisfies_equation_on_omega(seed, alpha):
    rng = np.random.default_rng(seed)
    omega = unit_ball(2, 1, 0)
    f = StepFunction(2, 1, 0, 4, rng.normal(size=16))
    u, system = solve_homogeneous(DirichletProblem(omega, alpha, f), 4, 0)
    assert system.weak_residual() <= 1e-9
    # the cell-average of D u on each cell of omega reproduces f (Galerkin is exact for step data)
    du = apply_spectral(u, VTParams(alpha, 2, 1))
    assert np.allclose(du.values.real, f.values.real, atol=1e-9 * max(1, np.max(np.abs(f.values))))
    assert energy(system) == pytest.approx(float(system.solution @ system.rhs))


def test_galerkin_matches_poisson_constant():
    p, alpha = 2, 0.5
    omega = unit_ball(p, 1, -1)
    g = StepFunction(p, 1, 1, 1, np.array([0, 2.0, 0, 0.5]), RadialKernel(1.0, -0.3))
    c = poisson_constant(g, 0, alpha)
    for m in (1, 3):
        u, system = solve_dirichlet(DirichletProblem(omega, alpha, None, g), m, 1)
        assert np.allclose(system.solution, c, rtol=1e-12)


def test_poisson_constant_of_one_is_one():
    for N in (-1, 0, 2):
        assert poisson_constant(RadialKernel(1.0, 0.0), N, 0.7, 1, 3) == pytest.approx(1.0, abs=1e-12)
    one = StepFunction(2, 1, 0, 1, np.ones(2), RadialKernel(1.0, 0.0))
    u = poisson_extend_ball(one, 0, 0.5)
    assert np.max(np.abs(u.values - 1)) <= 1e-12


def test_poisson_extension_is_harmonic_inside():
    p, alpha = 3, 0.4
    g = StepFunction.from_balls([(Ball(PadicPoint.from_rational([2], p), -1), 1.5)], p, 1, 0, 1)
    u = poisson_extend_ball(g, 0, alpha)
    d = apply_hypersingular(u, VTParams(alpha, p, 1))
    assert abs(d.values[0]) <= 1e-12
    with pytest.raises(ValueError):
        poisson_constant(RadialKernel(1.0, 0.5), 0, 0.4, 1, 3)


def test_radial_step_cell_average():
    g = radial_step(2, 1, 1, 3, 1.0, 0.2)
    # the zero cell holds the average of |x|^0.2 over |x| <= 1/8
    avg = integrate(StepFunction.indicator(ball_at_zero(2, -3), 1, 3) * g).real / 2**-3
    assert g.values[0].real == pytest.approx(avg, rel=1e-12)
    with pytest.raises(ValueError):
        radial_step(2, 1, 1, 3, 1.0, -1.5)


def test_zero_data_give_zero_solution():
    u, system = solve_dirichlet(DirichletProblem(unit_ball(), 0.5), 3, 0)
    assert np.all(u.values == 0)


def test_exterior_data_must_vanish_on_omega():
    g = StepFunction.indicator(ball_at_zero(2, 0), support_exp=0, scale=2)
    with pytest.raises(ValueError):
        solve_dirichlet(DirichletProblem(unit_ball(2, 1, -1), 0.5, None, g), 2, 0)
    with pytest.raises(ValueError):
        solve_homogeneous(DirichletProblem(unit_ball(2, 1, -1), 0.5, None, g), 2, 0)


def test_green_function_properties():
    omega = ball_at_zero(2, 0)
    G, system = green_matrix(omega, 3, 0.5)
    assert np.allclose(G, G.T)
    assert G.min() >= -1e-12
    y = Cell(PadicPoint.zero(2), -3)
    col = green_numeric(omega, y, 3, 0.5)
    assert np.allclose(col.values.real.ravel()[system.index], G[:, 0], rtol=1e-10)
    rep = green_bound_check(col, y, 0.5)
    assert rep.passed and rep.fitted_constant > 0


def test_comparison_on_example_domains():
    for problem, m, M in comparison_problems(3, 4):
        u, system = solve_dirichlet(problem, m, M)
        assert comparison_check(problem, u, system).passed


def test_comparison_needs_hypothesis_tag():
    omega = OpenSetDecomposition(2, 1, (ball_at_zero(2, 0),))
    u, system = solve_dirichlet(DirichletProblem(omega, 0.5), 1, 0)
    with pytest.raises(ValueError):
        comparison_check(DirichletProblem(omega, 0.5), u, system)
