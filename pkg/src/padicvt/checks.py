"""Named verification runs shared by the command line tool and the acceptance tests.

Each check returns a :class:`CheckResult` with the measured quantities, the
tolerance it was judged against and a short anchor naming the statement it
exercises.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict

import numpy as np

from .core import (
    Ball,
    BallRelation,
    Cell,
    OpenSetDecomposition,
    PadicPoint,
    ball_at_zero,
    ball_relation,
    haar_measure,
)
from .corpus import make_corpus, random_step_function
from .dirichlet import (
    DirichletProblem,
    assemble_gram,
    comparison_check,
    green_bound_check,
    green_numeric,
    poisson_extend_ball,
    radial_step,
    solve_dirichlet,
)
from .inequalities import (
    check_poincare_wirtinger,
    gagliardo_seminorm,
    rayleigh_minimum,
    weighted_positivity,
)
from .operator import (
    VTParams,
    apply_hypersingular,
    apply_spectral,
    radial_identity_check,
    riesz_kernel_pairing,
)
from .regularity import (
    LambdaSequence,
    check_measure_density,
    estimate_holder_exponent,
    example_density_bound,
    fundamental_constant,
    fundamental_solution_harmonicity_check,
    make_punctured_disk,
    make_sphere_union_domain,
)
from .schwartz import RadialKernel, StepFunction, domain_mask, fourier, integrate, inverse_fourier, l2_norm


@dataclass
class CheckResult:
    name: str
    passed: bool
    metrics: dict
    params: dict
    paper_ref: str
    seconds: float = 0.0
    failures: list = field(default_factory=list)


def _rel_sup(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# --- operator and Fourier ----------------------------------------------------------------


def operator_gap(f: StepFunction, params: VTParams) -> float:
    """Relative sup gap between the two operator routes, tails included."""
    a = apply_spectral(f, params)
    b = apply_hypersingular(f, params)
    gap = _rel_sup(a.values, b.values)
    ta, tb = a.tail.amplitude, b.tail.amplitude
    tscale = max(abs(ta), abs(tb), np.max(np.abs(a.values)), 1e-300)
    return max(gap, abs(ta - tb) / tscale)


@_timed
def check_dual_route(seed=7, count=200, primes=(2, 3, 5), alphas=(0.3, 0.5, 0.9, 1.5), dims=(1, 2), tol=1e-9):
    corpus = make_corpus(seed, count, primes, dims)
    worst, failures = 0.0, []
    for i, entry in enumerate(corpus):
        f = entry.function
        alpha = alphas[i % len(alphas)]
        gap = operator_gap(f, VTParams(alpha, f.prime, f.dimension))
        worst = max(worst, gap)
        if not gap <= tol:
            failures.append(entry.corpus_id)
    return CheckResult(
        "dual-route",
        not failures,
        {"max_gap": worst, "count": count, "tolerance": tol},
        {"seed": seed, "primes": list(primes), "alphas": list(alphas), "dimensions": list(dims)},
        "operator: symbol form against hypersingular integral form",
        failures=failures,
    )


@_timed
def check_fourier(seed=7, count=200, primes=(2, 3, 5), dims=(1, 2), tol=1e-10):
    worst_inv = worst_pl = 0.0
    for entry in make_corpus(seed, count, primes, dims):
        f = entry.function
        g = fourier(f)
        back = inverse_fourier(g)
        worst_inv = max(worst_inv, _rel_sup(back.values, f.values))
        a, b = l2_norm(f), l2_norm(g)
        worst_pl = max(worst_pl, abs(a - b) / max(a, 1e-300))
    ok = worst_inv <= tol and worst_pl <= tol
    return CheckResult(
        "fourier",
        ok,
        {"max_inversion_error": worst_inv, "max_plancherel_error": worst_pl, "tolerance": tol},
        {"seed": seed, "count": count},
        "Fourier transform: inversion rule and Plancherel identity",
    )


@_timed
def check_radial_identity(primes=(2, 3), alphas=(0.3, 0.7, 1.2), dims=(1, 2), tol=1e-12):
    worst = 0.0
    for p in primes:
        for n in dims:
            for a in alphas:
                params = VTParams(a, p, n)
                for k in range(-3, 4):
                    lhs, rhs = radial_identity_check(float(p) ** k, params)
                    worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return CheckResult(
        "radial-identity",
        worst <= tol,
        {"max_relative_error": worst, "tolerance": tol},
        {"primes": list(primes), "alphas": list(alphas), "dimensions": list(dims)},
        "|x|^alpha as a character integral against |xi|^(-alpha-n)",
    )


@_timed
def check_fundamental_solution(seed=11, count=20, primes=(2, 3), alphas=(0.3, 0.5, 0.9), dims=(1, 2), tol=1e-8):
    worst = 0.0
    rng = np.random.default_rng(seed)
    combos = [(p, n, a) for p in primes for n in dims for a in alphas if a < n]
    for i in range(count):
        p, n, a = combos[i % len(combos)]
        f = random_step_function(rng, p, n, max_cells=256)
        params = VTParams(a, p, n)
        pairing = riesz_kernel_pairing(apply_spectral(f, params), a, params)
        target = complex(f.values[(0,) * n])
        worst = max(worst, abs(pairing - target))
    return CheckResult(
        "fundamental-solution",
        worst <= tol,
        {"max_error": worst, "tolerance": tol},
        {"seed": seed, "count": count},
        "Riesz kernel f_alpha is a fundamental solution of the operator",
    )


@_timed
def check_weighted_positivity(seed=13, count=30, primes=(2, 3), alphas=(0.3, 0.5, 0.9), dims=(1, 2), tol=1e-8, neg_tol=1e-12):
    rng = np.random.default_rng(seed)
    worst, most_negative = 0.0, math.inf
    for i in range(count):
        p = primes[i % len(primes)]
        n = dims[(i // len(primes)) % len(dims)]
        a = alphas[i % len(alphas)]
        f = random_step_function(rng, p, n, real=True, max_cells=128)
        lhs, rhs = weighted_positivity(f, a)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0))
        most_negative = min(most_negative, lhs, rhs)
    ok = worst <= tol and most_negative >= -neg_tol
    return CheckResult(
        "weighted-positivity",
        ok,
        {"max_gap": worst, "min_side": most_negative, "tolerance": tol},
        {"seed": seed, "count": count},
        "weighted positivity of the operator against f_alpha",
    )


# --- seminorms ------------------------------------------------------------------------------


@_timed
def check_seminorm(seed=17, count=40, primes=(2, 3), dims=(1, 2), alpha=0.5, tol=1e-9):
    worst = 0.0
    for i, entry in enumerate(make_corpus(seed, count, primes, dims, max_cells=128)):
        f = entry.function
        worst = max(worst, gagliardo_seminorm(f, alpha).relative_gap)
        ball = ball_at_zero(f.prime, f.support_exp + (i % 2), f.dimension)
        worst = max(worst, gagliardo_seminorm(f, alpha, ball).relative_gap)
    tight = 0.0
    for m in (1, 2, 3):
        r = rayleigh_minimum(0, m, alpha, 2, 1)
        rep = check_poincare_wirtinger(r.minimizer, alpha, 0)
        tight = max(tight, abs(rep.lhs - r.best_constant * rep.rhs_seminorm) / rep.lhs)
    ok = worst <= tol and tight <= tol
    return CheckResult(
        "seminorm",
        ok,
        {"max_gap": worst, "max_tightness_error": tight, "tolerance": tol},
        {"seed": seed, "count": count, "alpha": alpha},
        "Gagliardo seminorm: double integral against Fourier weight; Poincare-Wirtinger at the Rayleigh minimiser",
    )


# --- Dirichlet problem -------------------------------------------------------------------------


@_timed
def check_dirichlet(alpha=0.5, tol=1e-9, exact_tol=1e-12):
    metrics = {}
    # 64-cell system: the ball B(4) in Q_2 at scale 4
    omega = OpenSetDecomposition(2, 1, (ball_at_zero(2, 2),), hypothesis="boundary")
    a = assemble_gram(omega, 4, 2, alpha, "spectral")
    b = assemble_gram(omega, 4, 2, alpha, "hypersingular")
    metrics["cells"] = a.size
    metrics["gram_gap"] = _rel_sup(a.gram, b.gram)
    rng = np.random.default_rng(5)
    f = StepFunction(2, 1, 2, 4, rng.random(64))
    _, sys_ = solve_dirichlet(DirichletProblem(omega, alpha, f), 4, 2)
    metrics["weak_residual"] = sys_.weak_residual()
    # Poisson constant for g = 1 outside the ball |x| <= 1/2
    one = StepFunction(2, 1, 0, 1, np.ones(2), RadialKernel(1.0, 0.0))
    u = poisson_extend_ball(one, 0, alpha)
    metrics["poisson_constant_error"] = float(np.max(np.abs(u.values - 1)))
    g = StepFunction.from_balls([(Ball(PadicPoint.from_rational([1], 2), -1), 1.0)], 2, 1, 0, 1)
    u = poisson_extend_ball(g, 0, alpha)
    d = apply_hypersingular(u, VTParams(alpha, 2, 1))
    metrics["poisson_harmonic_residual"] = float(abs(d.values[0]))
    ok = (
        metrics["gram_gap"] <= tol
        and metrics["weak_residual"] <= tol
        and metrics["poisson_constant_error"] <= exact_tol
        and metrics["poisson_harmonic_residual"] <= tol
    )
    return CheckResult("dirichlet", ok, metrics, {"alpha": alpha}, "weak formulation and the Poisson constant on a ball")


def _nonnegative_exterior(rng, omega: OpenSetDecomposition, M: int, m: int) -> StepFunction:
    p, n = omega.prime, omega.dimension
    mask = domain_mask(omega, M, M + m)
    vals = np.where(mask, 0.0, rng.random(mask.shape) * (rng.random(mask.shape) < 0.5))
    return StepFunction(p, n, M, m, vals)


def comparison_problems(seed: int, count: int, alpha: float = 0.5):
    """Seeded problems with f >= 0 and g >= 0 on the two example domains."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        if i % 2 == 0:
            omega = make_punctured_disk(2, 6)
            m = 6
        else:
            omega = make_sphere_union_domain(LambdaSequence((1, 3)), 2, 3)
            m = 6
        mask = domain_mask(omega, 0, m)
        f = StepFunction(2, 1, 0, m, np.where(mask, rng.random(mask.shape), 0.0))
        g = _nonnegative_exterior(rng, omega, 0, m)
        out.append((DirichletProblem(omega, alpha, f, g), m, 0))
    return out


@_timed
def check_comparison(seed=19, count=10, alpha=0.5, tol=1e-9):
    worst = math.inf
    for problem, m, M in comparison_problems(seed, count, alpha):
        u, system = solve_dirichlet(problem, m, M)
        rep = comparison_check(problem, u, system, tol)
        worst = min(worst, rep.min_u)
    return CheckResult(
        "comparison",
        worst >= -tol,
        {"min_u": worst, "tolerance": tol},
        {"seed": seed, "count": count, "alpha": alpha},
        "comparison principle: f >= 0, g >= 0 gives u >= 0",
    )


@_timed
def check_green(alpha=0.5, p=2, n=1, radii=(0, 1, 2), offset=2, spread=0.2, tol=1e-9):
    """Green functions on B(p^N) at scale m = N + offset, pole at the cell of 0."""
    constants, minima = [], []
    for N in radii:
        m = N + offset
        y = Cell(PadicPoint.zero(p, n), -m)
        G = green_numeric(ball_at_zero(p, N, n), y, m, alpha)
        rep = green_bound_check(G, y, alpha)
        constants.append(rep.fitted_constant)
        minima.append(rep.min_value)
    variation = max(constants) / min(constants) - 1
    ok = min(minima) >= -tol and variation <= spread
    return CheckResult(
        "green",
        ok,
        {"fitted_constants": constants, "min_values": minima, "variation": variation},
        {"alpha": alpha, "p": p, "n": n, "radii": list(radii), "scale_offset": offset},
        "Green function bound 0 <= G <= C |x-y|^(alpha-n) with C free of the domain",
    )


# --- boundary regularity -------------------------------------------------------------------------


@_timed
def check_regularity(alpha=0.5, p=2, ratio=3, count=7, scale=730, delta=0.4, depth=40, slope_tol=0.05):
    seq = LambdaSequence.geometric(ratio, count)
    regular = make_sphere_union_domain(seq, p, seq.lambdas[-1])
    rep = estimate_holder_exponent(regular, alpha, g=RadialKernel(1.0, delta), m_list=(scale // 2, scale))
    bound = example_density_bound(p, ratio)
    disk = make_punctured_disk(p, depth)
    c = fundamental_constant(p, alpha)
    irregular = estimate_holder_exponent(
        disk,
        alpha,
        g=RadialKernel(c, alpha - 1),
        m_list=(depth,),
        exterior_tail=True,
        density_seq=LambdaSequence.up_to(ratio, depth - 1),
    )
    metrics = {
        "gamma_regular": rep.gamma_fit,
        "r2_regular": rep.fit_r2,
        "nu_regular": str(rep.nu_observed),
        "nu_bound": str(bound),
        "gamma_irregular": irregular.gamma_fit,
        "nu_irregular": str(irregular.nu_observed),
    }
    ok = (
        rep.gamma_fit > 0
        and rep.fit_r2 >= 0.9
        and rep.nu_observed >= bound
        and abs(irregular.gamma_fit - (alpha - 1)) <= slope_tol
        and irregular.nu_observed == 0
    )
    return CheckResult(
        "regularity",
        ok,
        metrics,
        {"alpha": alpha, "p": p, "ratio": ratio, "scale": scale, "delta": delta, "depth": depth},
        "boundary Hoelder regularity under the measure-density condition; punctured disk counterexample",
    )


@_timed
def check_harmonicity(p=2, alpha=0.5, depth=14, tol=1e-6):
    rep = fundamental_solution_harmonicity_check(p, alpha, depth)
    ok = rep.residual <= tol and abs(rep.value_at_unit_sphere - rep.expected_unit_value) <= 1e-12
    return CheckResult(
        "harmonicity",
        ok,
        {"residual": rep.residual, "raw_residual_unit_shell": rep.raw_residual_unit_shell, "truncation_bound": rep.truncation_bound},
        {"p": p, "alpha": alpha, "depth": depth},
        "fundamental solution on the punctured disk is harmonic away from 0",
    )


@_timed
def check_exactness(seed=23, count=10_000):
    """Ultrametric dichotomy and measure additivity on random balls, in exact arithmetic."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(count):
        p = int(rng.choice([2, 3, 5]))
        n = int(rng.integers(1, 3))

        def rand_ball():
            coords = [Fraction(int(rng.integers(0, p**4)), p ** int(rng.integers(0, 3))) for _ in range(n)]
            return Ball(PadicPoint.from_rational(coords, p), int(rng.integers(-3, 3)))

        a, b = rand_ball(), rand_ball()
        rel = ball_relation(a, b)
        inter_a = a.contains_point(b.center)
        inter_b = b.contains_point(a.center)
        if rel is BallRelation.DISJOINT and (inter_a or inter_b):
            failures += 1
        if rel is not BallRelation.DISJOINT and not (inter_a or inter_b):
            failures += 1
        # a ball is the disjoint union of its p^n children
        if isinstance(a, Ball):
            kids = Cell(a.center, a.radius_exp).children()
            if sum((haar_measure(k) for k in kids), Fraction(0)) != haar_measure(a):
                failures += 1
            if type(haar_measure(a)) is not Fraction:
                failures += 1
    return CheckResult(
        "exactness",
        failures == 0,
        {"failures": failures, "cases": count},
        {"seed": seed},
        "ultrametric dichotomy of balls and additivity of Haar measure",
    )


REGISTRY: Dict[str, Callable[..., CheckResult]] = {
    "dual-route": check_dual_route,
    "fourier": check_fourier,
    "radial-identity": check_radial_identity,
    "fundamental-solution": check_fundamental_solution,
    "weighted-positivity": check_weighted_positivity,
    "seminorm": check_seminorm,
    "dirichlet": check_dirichlet,
    "comparison": check_comparison,
    "green": check_green,
    "regularity": check_regularity,
    "harmonicity": check_harmonicity,
    "exactness": check_exactness,
}
