"""
The nonlocal Dirichlet problem
==============================

Galerkin on cell indicators of the open set, with exact Gram entries.  The
exterior data enter only through the load vector.  On a ball with data
outside it the solution is the Poisson constant, and with nonnegative data
the solution stays nonnegative.
"""

import numpy as np

from padicvt.checks import comparison_problems
from padicvt.core import Cell, OpenSetDecomposition, PadicPoint, ball_at_zero
from padicvt.dirichlet import (
    DirichletProblem,
    comparison_check,
    green_bound_check,
    green_numeric,
    poisson_constant,
    solve_dirichlet,
)
from padicvt.schwartz import RadialKernel, StepFunction

omega = OpenSetDecomposition(2, 1, (ball_at_zero(2, -1),), hypothesis="boundary")
g = StepFunction(2, 1, 1, 1, np.array([0, 2.0, 0, 0.5]), RadialKernel(1.0, -0.3))
u, system = solve_dirichlet(DirichletProblem(omega, 0.5, None, g), 4, 1)
print("values on omega:", system.solution)
print("Poisson constant:", poisson_constant(g, 0, 0.5))
print("weak residual:", system.weak_residual())

# constant source on Z_2
omega = OpenSetDecomposition(2, 1, (ball_at_zero(2, 0),), hypothesis="boundary")
f = StepFunction.indicator(ball_at_zero(2, 0), support_exp=0, scale=3)
_, system = solve_dirichlet(DirichletProblem(omega, 0.5, f), 3, 0)
print("u for f = 1 on Z_2:", system.solution)

for problem, m, M in comparison_problems(seed=19, count=4):
    u, system = solve_dirichlet(problem, m, M)
    rep = comparison_check(problem, u, system)
    print(f"{problem.omega.family}: min u = {rep.min_u:.6f}")

for N in (0, 1, 2):
    y = Cell(PadicPoint.zero(2), -(N + 2))
    G = green_numeric(ball_at_zero(2, N), y, N + 2, 0.5)
    rep = green_bound_check(G, y, 0.5)
    print(f"Green on B(2^{N}): min {rep.min_value:.4f}, C = {rep.fitted_constant:.4f}")
