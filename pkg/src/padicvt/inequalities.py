"""Gagliardo seminorms and empirical checks of the Sobolev-type inequalities.

The inequality constants are never hard-coded.  Every checker returns the
ratio of the two sides, and :func:`best_constant_rayleigh` computes the best
Poincare-Wirtinger constant on a fixed cell space by a dense eigensolve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .core import Ball, Cell, PadicPoint, ball_relation, BallRelation
from .operator import (
    VTParams,
    apply_spectral,
    cell_radial_integrals,
    gamma_k,
    kernel_constant,
    pair_difference_integral,
    small_ball_moment,
    symbol_grid,
)
from .schwartz import (
    StepFunction,
    _valuations_1d,
    ball_mask,
    ball_sums,
    fourier,
    integrate,
    min_valuation_grid,
    radial_tail_sum,
    restrict,
    sphere_volume,
)

DEFAULT_CELL_CAP = 4096


@dataclass(frozen=True)
class SeminormReport:
    value_double_integral: float
    value_spectral: float
    relative_gap: float

    @property
    def value(self) -> float:
        return self.value_double_integral


@dataclass
class InequalityReport:
    check: str
    lhs: float
    rhs_seminorm: float
    empirical_constant: float
    corpus_id: Optional[str] = None
    passed: bool = True
    degenerate: bool = False
    notes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CapacityProblem:
    """Condenser data: cells of the compact set e inside B(p**ball_exp), resolved at ``scale``."""

    e_cells: tuple
    ball_exp: int
    scale: int
    prime: int
    dimension: int = 1
    variant: str = "global-seminorm"

    def __post_init__(self):
        if self.variant not in ("ball-seminorm", "global-seminorm"):
            raise ValueError(f"unknown capacity variant {self.variant!r}")
        outer = Ball(PadicPoint.zero(self.prime, self.dimension), self.ball_exp)
        for c in self.e_cells:
            if ball_relation(outer, c) not in (BallRelation.EQUAL, BallRelation.A_CONTAINS_B):
                raise ValueError("every cell of e must lie in the ball B_N")
            if c.radius_exp < -self.scale:
                raise ValueError("cells of e are finer than the working scale")


def _check_alpha(alpha: float):
    if not 0 < alpha < 1:
        raise ValueError(f"the Gagliardo seminorm is used for 0 < alpha < 1, got {alpha}")


def _relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


# --- seminorms -------------------------------------------------------------------


def _ball_pair_energy(values: np.ndarray, p: int, n: int, M: int, m: int, weight_power: float) -> float:
    """sum over x, y in B(p**M) of |u(x)-u(y)|^2 |x-y|^(-weight_power), u given on cells."""
    K = M + m
    cm = float(p) ** (-m * n)
    a2 = np.abs(values) ** 2
    s1 = [ball_sums(values, p, n, L) for L in range(K)] + [values]
    s2 = [ball_sums(a2, p, n, L) for L in range(K)] + [a2]
    total = np.zeros(values.shape)
    for j in range(-m + 1, M + 1):
        L = M - j
        count = sphere_volume(p, n, j) / cm
        sphere_u = s1[L] - s1[L + 1]
        sphere_a2 = s2[L] - s2[L + 1]
        term = count * a2 - 2 * np.real(np.conj(values) * sphere_u) + sphere_a2
        total = total + float(p) ** (-j * weight_power) * term
    return math.fsum(total.ravel().tolist()) * cm * cm


def _double_integral_global(u: StepFunction, alpha: float) -> float:
    p, n = u.prime, u.dimension
    w = 2 * alpha + n
    inside = pair_difference_integral(u, u.conj(), w, VTParams(alpha, p, n))
    # pairs with one point outside the support ball: the outer half mirrors the inner half
    ext = (1 - p ** (-n)) * radial_tail_sum(p, u.support_exp + 1, -2 * alpha)
    mass = integrate(u.abs2()).real
    return integrate(inside).real + mass * ext


def _spectral_global(u: StepFunction, alpha: float) -> float:
    p, n = u.prime, u.dimension
    g = fourier(u)
    a2 = np.abs(g.values) ** 2
    sym = symbol_grid(p, n, g.support_exp, g.levels, 2 * alpha)
    body = math.fsum((a2 * sym).ravel().tolist()) * g.cell_measure
    body += a2[(0,) * n] * small_ball_moment(p, n, -u.support_exp, 2 * alpha)
    return 2.0 * body / kernel_constant(VTParams(2 * alpha, p, n))


def ball_weight(p: int, n: int, N: int, k: int, alpha: float) -> float:
    """A_N at |xi| = p**k: integral over B_N of |chi(z xi) - 1|^2 |z|^(-n-2 alpha)."""
    if k < 1 - N:
        return 0.0
    first = 2.0 * float(p) ** (-2 * alpha * (1 - k))
    rest = sum(float(p) ** (-2 * alpha * i) for i in range(2 - k, N + 1))
    return first + 2.0 * (1 - p ** (-n)) * rest


def _restrict_to_ball(u: StepFunction, N: int) -> StepFunction:
    """u on B(p**N) as a grid with support_exp N (values outside are dropped)."""
    if u.tail is not None and N > u.support_exp:
        raise ValueError("u carries a radial tail; ball seminorms need u compactly supported in B_N")
    f = StepFunction(u.prime, u.dimension, u.support_exp, u.scale, u.values)
    if N >= f.support_exp:
        return f.extend(N)
    if f.scale < -N:
        f = f.refine(-N)
    step = f.prime ** (f.support_exp - N)
    return StepFunction(f.prime, f.dimension, N, f.scale, f.values[(slice(None, None, step),) * f.dimension])


def _spectral_ball(u: StepFunction, alpha: float, N: int) -> float:
    p, n = u.prime, u.dimension
    g = fourier(u)
    a2 = np.abs(g.values) ** 2
    k = g.support_exp - min_valuation_grid(p, n, g.levels)
    table = {int(kk): ball_weight(p, n, N, int(kk), alpha) for kk in np.unique(k)}
    weights = np.vectorize(table.__getitem__, otypes=[float])(k)
    weights[(0,) * n] = 0.0
    return math.fsum((a2 * weights).ravel().tolist()) * float(p) ** (-N * n)


def seminorm_squared(u: StepFunction, alpha: float, domain: Optional[Ball] = None, method: str = "double") -> float:
    """[u]^2 over K^n x K^n (domain None) or over B_N x B_N for the ball B_N = domain."""
    _check_alpha(alpha)
    if domain is None:
        if u.tail is not None:
            raise ValueError("global seminorm needs a compactly supported u")
        return _double_integral_global(u, alpha) if method == "double" else _spectral_global(u, alpha)
    if not domain.center.is_zero():
        raise ValueError("ball seminorms are taken over balls centred at 0")
    N = domain.radius_exp
    f = _restrict_to_ball(u, N)
    if method == "double":
        return _ball_pair_energy(f.values, f.prime, f.dimension, N, f.scale, 2 * alpha + f.dimension)
    return _spectral_ball(f, alpha, N)


def gagliardo_seminorm(u: StepFunction, alpha: float, domain: Optional[Ball] = None) -> SeminormReport:
    """[u]_alpha by the exact cell-pair sum and by the Fourier weight, side by side."""
    a = math.sqrt(max(seminorm_squared(u, alpha, domain, "double"), 0.0))
    b = math.sqrt(max(seminorm_squared(u, alpha, domain, "spectral"), 0.0))
    return SeminormReport(a, b, _relative_gap(a, b))


# --- inequality checks -------------------------------------------------------------


def check_fractional_sobolev(u: StepFunction, alpha: float, corpus_id=None) -> InequalityReport:
    """||u||_{L^{alpha*}} against [u]_alpha, alpha* = 2n/(n - 2 alpha)."""
    n = u.dimension
    if not 0 < alpha < min(1.0, n / 2):
        raise ValueError(f"need 0 < alpha < min(1, n/2), got alpha={alpha}, n={n}")
    if u.tail is not None:
        raise ValueError("u must be compactly supported")
    if not np.any(u.values):
        return InequalityReport("fractional-sobolev", 0.0, 0.0, 0.0, corpus_id, True, degenerate=True)
    q = 2 * n / (n - 2 * alpha)
    lhs = (math.fsum((np.abs(u.values) ** q).ravel().tolist()) * u.cell_measure) ** (1 / q)
    rhs = math.sqrt(seminorm_squared(u, alpha))
    ratio = lhs / rhs
    return InequalityReport("fractional-sobolev", lhs, rhs, ratio, corpus_id, math.isfinite(ratio), notes={"exponent": q})


def _same(u: StepFunction, r: StepFunction) -> bool:
    a, b = u._aligned(r)
    return bool(np.array_equal(a.values, b.values))


def check_poincare(u: StepFunction, alpha: float, omega, corpus_id=None) -> InequalityReport:
    """integral over omega of |u|^2 against the global seminorm [u]^2 (u = 0 off omega)."""
    n = u.dimension
    if not 0 < alpha < min(1.0, n / 2):
        raise ValueError(f"need 0 < alpha < min(1, n/2), got alpha={alpha}, n={n}")
    if u.tail is not None or not _same(u, restrict(u, omega)):
        raise ValueError("u must vanish outside omega")
    lhs = integrate(u.abs2()).real
    if lhs == 0:
        return InequalityReport("poincare", 0.0, 0.0, 0.0, corpus_id, True, degenerate=True)
    rhs = seminorm_squared(u, alpha)
    return InequalityReport("poincare", lhs, rhs, lhs / rhs, corpus_id, rhs > 0)


def check_poincare_wirtinger(u: StepFunction, alpha: float, N: int, corpus_id=None) -> InequalityReport:
    """||u - mean(u)||_{L^2(B_N)} against [u]_{alpha,N}."""
    _check_alpha(alpha)
    f = _restrict_to_ball(u, N)
    mean = np.mean(f.values)
    lhs = math.sqrt(math.fsum((np.abs(f.values - mean) ** 2).ravel().tolist()) * f.cell_measure)
    rhs = math.sqrt(max(_ball_pair_energy(f.values, f.prime, f.dimension, N, f.scale, 2 * alpha + f.dimension), 0.0))
    if rhs == 0:
        return InequalityReport("poincare-wirtinger", lhs, 0.0, 0.0, corpus_id, lhs == 0, degenerate=True)
    return InequalityReport("poincare-wirtinger", lhs, rhs, lhs / rhs, corpus_id, True)


# --- cell-space quadratic forms ---------------------------------------------------


def cell_distance_exponents(p: int, n: int, support_exp: int, levels: int) -> np.ndarray:
    """log_p |x_a - x_b| for all pairs of grid cells (flattened C order); diagonal set to -inf."""
    size = p**levels
    v = _valuations_1d(p, levels)
    idx = np.arange(size)
    diff_v = v[(idx[:, None] - idx[None, :]) % size]
    if n == 1:
        mv = diff_v
    else:
        grids = np.indices((size,) * n).reshape(n, -1)
        mv = None
        for axis in range(n):
            a = grids[axis]
            va = diff_v[a[:, None], a[None, :]]
            mv = va if mv is None else np.minimum(mv, va)
    out = (support_exp - mv).astype(float)
    np.fill_diagonal(out, -np.inf)
    return out


def seminorm_matrix(p: int, n: int, N: int, m: int, alpha: float, variant: str = "ball-seminorm") -> np.ndarray:
    """Q with u^T Q u = [u]^2 for real cell vectors u on B(p**N) at scale m.

    ``variant='global-seminorm'`` adds the pairs with one point outside B_N
    (u extended by zero), which puts 2 * E * cell_measure on the diagonal.
    """
    size = (p ** (N + m)) ** n
    if size > DEFAULT_CELL_CAP:
        raise ValueError(f"{size} cells exceed the matrix cap of {DEFAULT_CELL_CAP}")
    cm = float(p) ** (-m * n)
    e = cell_distance_exponents(p, n, N, N + m)
    W = cm * cm * np.power(float(p), -e * (2 * alpha + n))
    np.fill_diagonal(W, 0.0)
    Q = 2.0 * (np.diag(W.sum(axis=1)) - W)
    if variant == "global-seminorm":
        E = (1 - p ** (-n)) * radial_tail_sum(p, N + 1, -2 * alpha)
        Q += 2.0 * E * cm * np.eye(size)
    elif variant != "ball-seminorm":
        raise ValueError(f"unknown variant {variant!r}")
    return Q


@dataclass(frozen=True)
class RayleighResult:
    lambda_min: float
    best_constant: float
    minimizer: StepFunction


def rayleigh_minimum(N: int, m: int, alpha: float, p: int = 2, n: int = 1) -> RayleighResult:
    """Smallest value of [u]^2_{alpha,N} / ||u||^2 over mean-zero scale-m cell functions."""
    _check_alpha(alpha)
    if N + m < 1:
        raise ValueError("the scale must resolve at least two cells")
    Q = seminorm_matrix(p, n, N, m, alpha)
    size = Q.shape[0]
    cm = float(p) ** (-m * n)
    Z = scipy.linalg.null_space(np.ones((1, size)))
    vals, vecs = scipy.linalg.eigh(Z.T @ Q @ Z)
    lam = vals[0] / cm
    u = (Z @ vecs[:, 0]).reshape((p ** (N + m),) * n)
    return RayleighResult(lam, lam**-0.5, StepFunction(p, n, N, m, u))


def best_constant_rayleigh(N: int, m: int, alpha: float, p: int = 2, n: int = 1) -> float:
    """Best Poincare-Wirtinger constant C = lambda_min**-0.5 on the scale-m cell space."""
    return rayleigh_minimum(N, m, alpha, p, n).best_constant


def rayleigh_sweep(alphas=(0.3, 0.5, 0.8), Ns=(-1, 0, 1), ms=(1, 2, 3), p: int = 2, n: int = 1, samples: int = 50, seed: int = 0) -> list:
    """Rows (alpha, N, m, lambda_min, ratio_max) for a refinement study.

    ``ratio_max`` is the largest Poincare-Wirtinger ratio seen on ``samples``
    seeded random cell functions; it never exceeds lambda_min**-0.5.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for alpha in alphas:
        for N in Ns:
            for m in ms:
                if N + m < 1:
                    continue  # a single cell has no mean-zero functions
                res = rayleigh_minimum(N, m, alpha, p, n)
                shape = (p ** (N + m),) * n
                worst = 0.0
                for _ in range(samples):
                    rep = check_poincare_wirtinger(StepFunction(p, n, N, m, rng.normal(size=shape)), alpha, N)
                    worst = max(worst, rep.empirical_constant)
                rows.append((alpha, N, m, res.lambda_min, worst))
    return rows


# --- capacity ---------------------------------------------------------------------


def _e_mask(problem: CapacityProblem) -> np.ndarray:
    K = problem.ball_exp + problem.scale
    mask = np.zeros((problem.prime**K,) * problem.dimension, dtype=bool)
    for c in problem.e_cells:
        mask |= ball_mask(c, problem.ball_exp, K)
    return mask.ravel()


def capacity_upper(problem: CapacityProblem, alpha: float) -> float:
    """min [u]^2 over scale-m cell functions on B_N with u = 1 on the cells of e."""
    _check_alpha(alpha)
    if not problem.e_cells:
        raise ValueError("the compact set e is empty")
    p, n, N, m = problem.prime, problem.dimension, problem.ball_exp, problem.scale
    Q = seminorm_matrix(p, n, N, m, alpha, problem.variant)
    fixed = _e_mask(problem)
    free = ~fixed
    ones = np.ones(int(fixed.sum()))
    Qee = Q[np.ix_(fixed, fixed)]
    if not free.any():
        return float(ones @ Qee @ ones)
    Qff = Q[np.ix_(free, free)]
    Qfe = Q[np.ix_(free, fixed)]
    b = Qfe @ ones
    cho = scipy.linalg.cho_factor(Qff)
    return float(ones @ Qee @ ones - b @ scipy.linalg.cho_solve(cho, b))


def capacity_minimizer(problem: CapacityProblem, alpha: float) -> StepFunction:
    p, n, N, m = problem.prime, problem.dimension, problem.ball_exp, problem.scale
    Q = seminorm_matrix(p, n, N, m, alpha, problem.variant)
    fixed = _e_mask(problem)
    free = ~fixed
    u = np.ones(Q.shape[0])
    if free.any():
        b = Q[np.ix_(free, fixed)] @ np.ones(int(fixed.sum()))
        u[free] = -scipy.linalg.solve(Q[np.ix_(free, free)], b, assume_a="pos")
    return StepFunction(p, n, N, m, u.reshape((p ** (N + m),) * n))


def check_capacity_inequality(
    u: StepFunction,
    e_cells: Sequence[Cell],
    alpha: float,
    N: int,
    variant: str = "global-seminorm",
    corpus_id=None,
) -> InequalityReport:
    """cap(e, B_N) * ||u||^2 against [u]^2 on the ball of radius p^(N-1) carrying u.

    The capacity is the scale-m upper bound from :func:`capacity_upper` at the
    scale of u, and both sides are quadratic in u so the ratio is scale free.
    """
    if not u.is_real:
        raise ValueError("u must be real valued")
    if u.tail is not None:
        raise ValueError("u must be compactly supported")
    p, n = u.prime, u.dimension
    m = max(u.scale, max((-c.radius_exp for c in e_cells), default=u.scale), -(N - 1))
    f = _restrict_to_ball(u, N).refine(max(m, u.scale)) if u.support_exp <= N else None
    if f is None or not _same(u, f):
        raise ValueError("u must be supported in B_N")
    nz = np.argwhere(f.values != 0)
    if len(nz) == 0:
        return InequalityReport("capacity", 0.0, 0.0, 0.0, corpus_id, True, degenerate=True)
    # the sub-ball B_{N-1}(xi) holding the support: cells sharing the top digit
    top = {tuple(int(i) % p for i in idx) for idx in nz}
    if len(top) != 1:
        raise ValueError("the support of u must lie in a single ball of radius p^(N-1)")
    problem = CapacityProblem(tuple(e_cells), N, f.scale, p, n, variant)
    emask = _e_mask(problem).reshape(f.values.shape)
    if np.any(emask & (f.values != 0)):
        raise ValueError("supp u must stay at positive distance from e")
    cap = capacity_upper(problem, alpha)
    digit = next(iter(top))
    sub = f.values[tuple(slice(d, None, p) for d in digit)]
    norm2 = math.fsum((sub**2).real.ravel().tolist()) * f.cell_measure
    rhs = _ball_pair_energy(sub, p, n, N - 1, f.scale, 2 * alpha + n)
    lhs = cap * norm2
    ratio = lhs / rhs if rhs > 0 else math.inf
    return InequalityReport("capacity", lhs, rhs, ratio, corpus_id, math.isfinite(ratio), notes={"capacity": cap})


# --- weighted positivity -----------------------------------------------------------


def weighted_positivity(u: StepFunction, alpha: float):
    """Both sides of 2 int (D u) u f_alpha = u(0)^2 + a int int |u(x)-u(y)|^2 |x-y|^(-n-alpha) f_alpha(x).

    The left side goes through the spectral operator and the exact Riesz
    weights per cell; the right side through the cell-pair sum.  The constant
    a is the kernel constant of the operator.
    """
    if not u.is_real:
        raise ValueError("u must be real valued")
    if u.tail is not None:
        raise ValueError("u must be compactly supported")
    p, n = u.prime, u.dimension
    if not 0 < alpha < n:
        raise ValueError(f"need 0 < alpha < n, got {alpha}")
    params = VTParams(alpha, p, n)
    G = gamma_k(alpha, p, n)
    weights = cell_radial_integrals(p, n, u.support_exp, u.levels, alpha - n) / G
    du = apply_spectral(u, params)
    lhs = 2.0 * math.fsum((du.values.real * u.values.real * weights).ravel().tolist())
    pd = pair_difference_integral(u, u, alpha + n, params).values.real
    inner = math.fsum((pd * weights).ravel().tolist())
    # x outside the support: |x - y| = |x| for every y in the support
    outer = integrate(u.abs2()).real * (1 - p ** (-n)) * radial_tail_sum(p, u.support_exp + 1, -n) / G
    u0 = u.values.real[(0,) * n]
    rhs = u0 * u0 + kernel_constant(params) * (inner + outer)
    return lhs, rhs
