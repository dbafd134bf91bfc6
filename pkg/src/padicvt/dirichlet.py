"""Galerkin solution of D^alpha u = f in an open set, u = g outside it.

The trial space is spanned by indicators of the scale-m cells inside the
open set.  Gram entries are exact: the energy pairing of two cell
indicators only depends on the distance between the cells.  The exterior
data g enters the load vector through the kernel, with no exterior mesh.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.linalg

from .core import Ball, Cell, OpenSetDecomposition, PadicPoint, index_to_point
from .inequalities import cell_distance_exponents
from .operator import VTParams, apply_hypersingular, kernel_constant, small_ball_moment
from .schwartz import RadialKernel, StepFunction, domain_mask, min_valuation_grid, radial_tail_sum

DEFAULT_BASIS_CAP = 4096


@dataclass
class DirichletProblem:
    """D^alpha u = f on omega, u = g off omega (g None means zero)."""

    omega: OpenSetDecomposition
    alpha: float
    f: Optional[StepFunction] = None
    g: Optional[StepFunction] = None

    @property
    def prime(self) -> int:
        return self.omega.prime

    @property
    def dimension(self) -> int:
        return self.omega.dimension

    @property
    def params(self) -> VTParams:
        return VTParams(self.alpha, self.prime, self.dimension)


@dataclass
class GalerkinSystem:
    prime: int
    dimension: int
    support_exp: int
    scale: int
    alpha: float
    index: np.ndarray  # flat grid indices of the basis cells
    gram: np.ndarray
    rhs: Optional[np.ndarray] = None
    solution: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.index)

    @property
    def grid_shape(self) -> tuple:
        return (self.prime ** (self.support_exp + self.scale),) * self.dimension

    @property
    def cell_measure(self) -> float:
        return float(self.prime) ** (-self.scale * self.dimension)

    @property
    def basis(self) -> list:
        shape = self.grid_shape
        return [
            Cell(index_to_point(np.unravel_index(i, shape), self.prime, self.support_exp), -self.scale)
            for i in self.index
        ]

    def weak_residual(self) -> float:
        """max_i |(u_h, phi_i) - load_i| relative to the load scale."""
        r = self.gram @ self.solution - self.rhs
        ref = max(np.max(np.abs(self.rhs)), np.max(np.abs(self.gram)) * np.max(np.abs(self.solution)), 1e-300)
        return float(np.max(np.abs(r)) / ref)


# --- assembly --------------------------------------------------------------------


def _basis_index(omega: OpenSetDecomposition, M: int, m: int) -> np.ndarray:
    if M + m < 0:
        raise ValueError("need support_exp + scale >= 0")
    try:
        mask = domain_mask(omega, M, M + m)
    except ValueError as exc:
        raise ValueError(f"domain is not resolvable at scale {m} inside B(p^{M}): {exc}") from exc
    idx = np.flatnonzero(mask.ravel())
    if len(idx) > DEFAULT_BASIS_CAP:
        raise ValueError(f"{len(idx)} basis cells exceed the cap of {DEFAULT_BASIS_CAP}")
    return idx


def pair_energy_radial(p: int, n: int, m: int, alpha: float, dist_exp: float) -> float:
    """(1_a, 1_b) for scale-m cells at distance p**dist_exp (-inf for a = b).

    The spectral integral of |xi|^alpha chi((c_a - c_b) xi) over |xi| <= p^m,
    summed sphere by sphere: full spheres up to |xi| = 1/|c_a - c_b|, one
    sphere of cancelling characters, nothing beyond.
    """
    cm = float(p) ** (-m * n)
    a = alpha
    if dist_exp == -math.inf:
        top = m
    else:
        top = min(m, -int(dist_exp))
    # sum_{k <= top} p^(k alpha) * vol(|xi| = p^k)
    full = (1 - p ** (-n)) * float(p) ** (top * (a + n)) / (1 - p ** (-a - n))
    edge = 0.0
    if dist_exp != -math.inf and 1 - int(dist_exp) <= m:
        k = 1 - int(dist_exp)
        edge = -(float(p) ** (k * a)) * float(p) ** ((k - 1) * n)
    return cm * cm * (full + edge)


def _gram_spectral(p, n, M, m, alpha, idx):
    e = cell_distance_exponents(p, n, M, M + m)[np.ix_(idx, idx)] if len(idx) else np.zeros((0, 0))
    gram = np.empty(e.shape)
    for val in np.unique(e):
        gram[e == val] = pair_energy_radial(p, n, m, alpha, float(val))
    return gram


def _gram_hypersingular(p, n, M, m, alpha, idx):
    params = VTParams(alpha, p, n)
    shape = (p ** (M + m),) * n
    cm = float(p) ** (-m * n)
    gram = np.empty((len(idx), len(idx)))
    for col, i in enumerate(idx):
        e = np.zeros(shape)
        e.flat[i] = 1.0
        d = apply_hypersingular(StepFunction(p, n, M, m, e), params, interior_only=True)
        gram[:, col] = cm * d.values.real.ravel()[idx]
    return gram


def assemble_gram(omega: OpenSetDecomposition, m: int, M: int, alpha: float, method: str = "spectral") -> GalerkinSystem:
    """Exact Gram matrix of the energy form on the scale-m cells of omega inside B(p^M)."""
    p, n = omega.prime, omega.dimension
    idx = _basis_index(omega, M, m)
    if method == "spectral":
        gram = _gram_spectral(p, n, M, m, alpha, idx)
    elif method == "hypersingular":
        gram = _gram_hypersingular(p, n, M, m, alpha, idx)
    else:
        raise ValueError(f"unknown assembly method {method!r}")
    return GalerkinSystem(p, n, M, m, alpha, idx, gram)


# --- exterior data -----------------------------------------------------------------


def radial_step(p: int, n: int, support_exp: int, scale: int, amplitude: float, exponent: float) -> StepFunction:
    """amplitude * |x|^exponent as a step function with an exact radial tail.

    Cells away from 0 take the (constant) value; the cell at 0 takes the
    cell average, which needs exponent > -n.
    """
    K = support_exp + scale
    v = min_valuation_grid(p, n, K)
    vals = amplitude * np.power(float(p), (support_exp - v) * exponent)
    zero_cell = (0,) * n
    if exponent > -n:
        vals[zero_cell] = amplitude * small_ball_moment(p, n, -scale, exponent) * float(p) ** (scale * n)
    else:
        raise ValueError("the radial datum is not integrable at 0")
    return StepFunction(p, n, support_exp, scale, vals, RadialKernel(amplitude, exponent))


def _exterior_data(problem: DirichletProblem, M: int, m: int, idx: np.ndarray) -> Optional[StepFunction]:
    g = problem.g
    if g is None:
        return None
    if g.tail is not None and g.tail.exponent >= problem.alpha:
        raise ValueError("exterior data grow too fast: the moment of g against the kernel diverges")
    Mg = max(M, g.support_exp)
    gg = g.regrid(Mg, max(m, g.scale))
    if gg.scale != m:
        raise ValueError("exterior data are finer than the working scale")
    vals = np.array(gg.values)
    step = problem.prime ** (Mg - M)
    sub = vals[(slice(None, None, step),) * problem.dimension]
    if np.any(sub.ravel()[idx] != 0):
        raise ValueError("g must vanish on omega")
    return StepFunction(gg.prime, gg.dimension, Mg, m, vals, gg.tail)


def load_vector(problem: DirichletProblem, system: GalerkinSystem) -> np.ndarray:
    """int f phi_i minus the pairing of the exterior data with phi_i."""
    p, n, M, m = system.prime, system.dimension, system.support_exp, system.scale
    cm = system.cell_measure
    rhs = np.zeros(system.size)
    if problem.f is not None:
        f = problem.f
        if f.tail is not None:
            raise ValueError("f must be compactly supported in omega")
        if f.support_exp > M or f.scale > m:
            raise ValueError("f is not resolved by the Galerkin grid")
        fv = f.regrid(M, m).values.real.ravel()
        outside = np.ones(fv.shape, dtype=bool)
        outside[system.index] = False
        if np.any(fv[outside] != 0):
            raise ValueError("f must be supported in omega")
        rhs += cm * fv[system.index]
    g = _exterior_data(problem, M, m, system.index)
    if g is not None:
        dg = apply_hypersingular(g, problem.params, interior_only=True)
        step = p ** (g.support_exp - M)
        sub = dg.values.real[(slice(None, None, step),) * n].ravel()
        rhs -= cm * sub[system.index]
    return rhs


def _factor_solve(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        cho = scipy.linalg.cho_factor(gram)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("Gram matrix is not positive definite") from exc
    return scipy.linalg.cho_solve(cho, rhs)


def solve_dirichlet(problem: DirichletProblem, m: int, M: int, method: str = "spectral"):
    """Galerkin solution at scale m; returns (u, system) with u = g off omega."""
    omega = problem.omega
    system = assemble_gram(omega, m, M, problem.alpha, method)
    system.rhs = load_vector(problem, system)
    system.solution = _factor_solve(system.gram, system.rhs) if system.size else np.zeros(0)
    system.info["weak_residual"] = system.weak_residual() if system.size else 0.0
    return assemble_solution(problem, system), system


def assemble_solution(problem: DirichletProblem, system: GalerkinSystem) -> StepFunction:
    p, n, M, m = system.prime, system.dimension, system.support_exp, system.scale
    vals = np.zeros(system.grid_shape)
    vals.flat[system.index] = system.solution
    u = StepFunction(p, n, M, m, vals)
    g = _exterior_data(problem, M, m, system.index)
    if g is not None:
        u = u + g
    return u


def solve_homogeneous(problem: DirichletProblem, m: int, M: int, method: str = "spectral"):
    if problem.g is not None and (problem.g.tail is not None or np.any(problem.g.values)):
        raise ValueError("solve_homogeneous needs g = 0; use solve_dirichlet")
    return solve_dirichlet(DirichletProblem(problem.omega, problem.alpha, problem.f, None), m, M, method)


def energy(system: GalerkinSystem) -> float:
    x = system.solution
    return float(x @ system.gram @ x)


# --- Poisson constant on a ball -------------------------------------------------------


def poisson_constant(g: Union[StepFunction, RadialKernel], N: int, alpha: float, n: int = 1, p: Optional[int] = None) -> float:
    """The constant value inside {|x| <= p^(-N-1)} of the solution with exterior data g."""
    if isinstance(g, RadialKernel):
        if p is None:
            raise ValueError("a radial datum needs the prime")
        if g.exponent >= alpha:
            raise ValueError("divergent moment: the radial datum does not decay against the kernel")
        moment = g.amplitude * (1 - p ** (-n)) * radial_tail_sum(p, -N, g.exponent - alpha)
    else:
        p, n = g.prime, g.dimension
        if g.tail is not None and g.tail.exponent >= alpha:
            raise ValueError("divergent moment: the radial tail does not decay against the kernel")
        f = g.regrid(max(g.support_exp, -N), max(g.scale, N + 1))
        K = f.levels
        e = f.support_exp - min_valuation_grid(p, n, K)
        outside = e >= -N
        w = np.where(outside, np.power(float(p), np.where(outside, e, 0) * (-n - alpha)), 0.0) * f.cell_measure
        moment = math.fsum((f.values.real * w).ravel().tolist())
        if f.tail is not None:
            moment += f.tail.amplitude * (1 - p ** (-n)) * radial_tail_sum(p, f.support_exp + 1, f.tail.exponent - alpha)
    return (1 - p ** (-alpha)) / (1 - p ** (-n)) * float(p) ** (-N * alpha) * moment


def poisson_extend_ball(g: Union[StepFunction, RadialKernel], N: int, alpha: float, n: int = 1, p: Optional[int] = None) -> StepFunction:
    """u = g off the ball {|x| <= p^(-N-1)}, the Poisson constant inside it."""
    c = poisson_constant(g, N, alpha, n, p)
    if isinstance(g, RadialKernel):
        # grid on the sphere |x| = p^-N at scale N+1: the cell at 0 is the inner ball
        vals = np.full((p,) * n, complex(g.on_sphere(p, -N)))
        vals[(0,) * n] = c
        return StepFunction(p, n, -N, N + 1, vals, g)
    f = g.regrid(max(g.support_exp, -N), max(g.scale, N + 1))
    e = f.support_exp - min_valuation_grid(f.prime, f.dimension, f.levels)
    inside = e < -N
    vals = np.where(inside, c, f.values)
    return f.with_values(vals)


# --- Green function ---------------------------------------------------------------------


@dataclass
class GreenReport:
    min_value: float
    fitted_constant: float
    symmetry_gap: Optional[float] = None
    passed: bool = True


def _ball_domain(omega: Union[Ball, OpenSetDecomposition]) -> OpenSetDecomposition:
    if isinstance(omega, Ball):
        return OpenSetDecomposition(omega.prime, omega.dimension, (omega,), hypothesis="boundary")
    return omega


def green_matrix(omega, m: int, alpha: float, M: Optional[int] = None):
    """G(x_i, x_j) for all pairs of basis cells.

    With u = sum_j G(., x_j) f_j mes(cell_j) and Gram u = mes(cell) f, G is the
    inverse Gram matrix itself.
    """
    omega = _ball_domain(omega)
    if M is None:
        M = max(b.radius_exp for b in omega.balls)
    system = assemble_gram(omega, m, M, alpha)
    G = scipy.linalg.cho_solve(scipy.linalg.cho_factor(system.gram), np.eye(system.size))
    return G, system


def green_numeric(omega, y: Cell, m: int, alpha: float, M: Optional[int] = None) -> StepFunction:
    """G(., y): the Galerkin solution with f = 1_y / mes(y), zero outside omega."""
    omega = _ball_domain(omega)
    if M is None:
        M = max(b.radius_exp for b in omega.balls)
    if y.radius_exp != -m:
        raise ValueError("the pole cell must be a grid cell")
    f = StepFunction.from_balls([(y, float(y.prime) ** (m * y.dimension))], y.prime, y.dimension, M, m)
    u, system = solve_homogeneous(DirichletProblem(omega, alpha, f), m, M)
    return u


def green_bound_check(G: StepFunction, y: Cell, alpha: float, tolerance: float = 1e-9) -> GreenReport:
    """min G and sup G(x, y) |x - y|^(n - alpha); the pole cell uses its own radius."""
    p, n = G.prime, G.dimension
    e = cell_distance_exponents(p, n, G.support_exp, G.levels)
    from .core import point_to_index

    j = np.ravel_multi_index(point_to_index(y.center, G.support_exp, G.levels), G.values.shape)
    dist = e[:, j].copy()
    dist[j] = -G.scale
    vals = G.values.real.ravel()
    weights = np.power(float(p), dist * (n - alpha))
    support = vals != 0
    fitted = float(np.max(vals[support] * weights[support])) if support.any() else 0.0
    gmin = float(vals.min())
    return GreenReport(gmin, fitted, None, gmin >= -tolerance)


# --- comparison principle ----------------------------------------------------------------


@dataclass
class ComparisonReport:
    min_u: float
    hypothesis: str
    passed: bool
    tolerance: float


def comparison_check(problem: DirichletProblem, solution: StepFunction, system: GalerkinSystem, tolerance: float = 1e-9) -> ComparisonReport:
    """u >= 0 on omega whenever f >= 0 and g >= 0."""
    tag = problem.omega.hypothesis
    if tag is None:
        raise ValueError("the domain carries no hypothesis tag (boundary / translation-invariant)")
    if problem.f is not None and np.any(problem.f.values.real < 0):
        raise ValueError("f must be nonnegative")
    if problem.g is not None:
        if np.any(problem.g.values.real < 0) or (problem.g.tail is not None and problem.g.tail.amplitude < 0):
            raise ValueError("g must be nonnegative")
    u_omega = system.solution
    min_u = float(u_omega.min()) if len(u_omega) else 0.0
    return ComparisonReport(min_u, tag, min_u >= -tolerance, tolerance)
