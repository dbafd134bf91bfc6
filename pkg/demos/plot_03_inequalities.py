"""
Seminorms, Poincare constants and capacity
==========================================

The Gagliardo seminorm is computed from cell pairs and from the Fourier
weight.  On a ball the best Poincare-Wirtinger constant comes from the
smallest eigenvalue of the cell quadratic form, and the capacity of a small
ball from a constrained minimisation.
"""

import numpy as np

from padicvt.core import Cell, PadicPoint, ball_at_zero
from padicvt.inequalities import (
    CapacityProblem,
    capacity_upper,
    check_poincare_wirtinger,
    gagliardo_seminorm,
    rayleigh_minimum,
    weighted_positivity,
)
from padicvt.schwartz import StepFunction

rng = np.random.default_rng(1)
u = StepFunction(2, 1, 1, 3, rng.normal(size=16))
rep = gagliardo_seminorm(u, 0.4)
print(f"[u] double integral {rep.value_double_integral:.12f}, spectral {rep.value_spectral:.12f}")
rep = gagliardo_seminorm(u, 0.4, ball_at_zero(2, 0))
print(f"[u] on B(1): {rep.value_double_integral:.12f} vs {rep.value_spectral:.12f}")

# lambda_min on Z_2 does not move as the cells get finer
for m in (1, 2, 3, 4):
    r = rayleigh_minimum(0, m, 0.5)
    pw = check_poincare_wirtinger(r.minimizer, 0.5, 0)
    print(f"m={m}: lambda_min={r.lambda_min:.12f}  C={r.best_constant:.12f}  ratio at minimizer={pw.empirical_constant:.12f}")

# capacity of B(1/4) in Z_2, refined
for m in (2, 3, 4, 5):
    prob = CapacityProblem((Cell(PadicPoint.zero(2), -2),), 0, m, 2)
    print(f"cap_m={m}: {capacity_upper(prob, 0.5):.10f}")

lhs, rhs = weighted_positivity(StepFunction(3, 1, 0, 2, rng.normal(size=9)), 0.7)
print(f"weighted positivity: {lhs:.12f} = {rhs:.12f}")
