"""The fractional operator D^alpha with symbol |xi|^alpha (max-norm on Q_p^n).

Two independent evaluations are provided: :func:`apply_spectral` multiplies
the exact Fourier transform by the symbol, :func:`apply_hypersingular`
integrates the kernel against sphere sums of the function.  Both return the
image exactly on the support ball plus its radial tail
``-kernel_constant * integral(f) * |x|**(-alpha-n)`` outside it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .schwartz import (
    RadialKernel,
    StepFunction,
    ball_sums,
    fourier,
    integrate,
    inverse_fourier,
    min_valuation_grid,
    radial_tail_sum,
    sphere_volume,
)


@dataclass(frozen=True)
class VTParams:
    alpha: float
    prime: int
    dimension: int = 1

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.prime < 2 or self.dimension < 1:
            raise ValueError("invalid prime or dimension")

    @property
    def q(self) -> int:
        return self.prime**self.dimension


def kernel_constant(params: VTParams) -> float:
    """(p^alpha - 1) / (1 - p^(-alpha-n)): the kernel is this times |y|^(-alpha-n)."""
    p, a, n = params.prime, params.alpha, params.dimension
    return (p**a - 1.0) / (1.0 - p ** (-a - n))


def kernel(params: VTParams) -> RadialKernel:
    return RadialKernel(kernel_constant(params), -params.alpha - params.dimension)


def gamma_k(gamma: float, p: int, n: int = 1) -> float:
    """(1 - p^(gamma-n)) / (1 - p^(-gamma)), the normalizer of the Riesz kernel."""
    return (1.0 - p ** (gamma - n)) / (1.0 - p ** (-gamma))


def _check(f: StepFunction, params: VTParams):
    if (f.prime, f.dimension) != (params.prime, params.dimension):
        raise ValueError("function and parameters disagree on prime/dimension")


def symbol_grid(p: int, n: int, support_exp: int, levels: int, power: float) -> np.ndarray:
    """|xi|^power on the nonzero cells of a frequency grid; 0 on the zero cell."""
    v = min_valuation_grid(p, n, levels)
    out = np.power(float(p), (support_exp - v) * power)
    out[(0,) * n] = 0.0
    return out


def small_ball_moment(p: int, n: int, radius_exp: int, power: float) -> float:
    """integral over |xi| <= p^radius_exp of |xi|^power, for power > -n."""
    return (1 - p ** (-n)) * radial_tail_sum(p, -radius_exp, -(power + n))


def apply_spectral(f: StepFunction, params: VTParams) -> StepFunction:
    """F^{-1}[ |xi|^alpha F f ] computed cell by cell.

    The frequency cell at the origin is handled by integrating the symbol over
    it in closed form; it contributes a constant on the support ball and the
    whole exterior tail.
    """
    _check(f, params)
    p, n, a = params.prime, params.dimension, params.alpha
    g = fourier(f)
    sym = symbol_grid(p, n, g.support_exp, g.levels, a)
    interior = inverse_fourier(g.with_values(g.values * sym))
    g0 = complex(g.values[(0,) * n])
    # frequencies in the zero cell: |xi| <= p^-M, where chi(-x xi) = 1 on the support
    z = small_ball_moment(p, n, -f.support_exp, a)
    vals = interior.values + g0 * z
    tail_coef = (1 - p ** (-n)) / (1 - p ** (-a - n)) - p**a
    tail = RadialKernel(_real_if_possible(g0 * tail_coef), -a - n)
    return StepFunction(p, n, f.support_exp, f.scale, vals, tail)


def _real_if_possible(z: complex):
    return z.real if z.imag == 0 else z


def apply_hypersingular(f: StepFunction, params: VTParams, interior_only: bool = False) -> StepFunction:
    """integral K(y) [f(x) - f(x+y)] dy, summed exactly over spheres |y| = p^j.

    Spheres below the constancy scale contribute nothing; spheres inside the
    support contribute sphere sums of cell values; spheres beyond the support
    are a closed-form geometric series.  A radial input tail amplitude*|x|^e
    (needs e < alpha) is integrated in closed form as well; the result is then
    only computed on the support ball and ``interior_only=True`` is required.
    """
    _check(f, params)
    p, n, a = params.prime, params.dimension, params.alpha
    M, m, K = f.support_exp, f.scale, f.levels
    C = kernel_constant(params)
    vals = f.values
    cm = float(p) ** (-m * n)
    sums = [ball_sums(vals, p, n, level) for level in range(K)] + [vals]
    out = vals * (C * (1 - p ** (-n)) * radial_tail_sum(p, M + 1, -a))
    for j in range(-m + 1, M + 1):
        level = M - j
        sphere_sum = sums[level] - sums[level + 1]
        out = out + C * float(p) ** (-j * (a + n)) * (vals * sphere_volume(p, n, j) - cm * sphere_sum)
    if f.tail is not None:
        if not interior_only:
            raise ValueError("input has a radial tail; pass interior_only=True")
        t = f.tail
        out = out - C * t.amplitude * (1 - p ** (-n)) * radial_tail_sum(p, M + 1, t.exponent - a)
        return StepFunction(p, n, M, m, out, None)
    total = integrate(f)
    tail = None if interior_only else RadialKernel(-C * _real_if_possible(total), -a - n)
    return StepFunction(p, n, M, m, out, tail)


def apply(f: StepFunction, params: VTParams, method: str = "spectral") -> StepFunction:
    if method == "spectral":
        return apply_spectral(f, params)
    if method == "hypersingular":
        return apply_hypersingular(f, params)
    raise ValueError(f"unknown method {method!r}")


def cell_radial_integrals(p: int, n: int, support_exp: int, levels: int, power: float) -> np.ndarray:
    """integral of |x|^power over each grid cell (power > -n for the cell at the origin)."""
    scale = levels - support_exp
    v = min_valuation_grid(p, n, levels)
    out = np.power(float(p), (support_exp - v) * power) * float(p) ** (-scale * n)
    out[(0,) * n] = small_ball_moment(p, n, -scale, power)
    return out


def riesz_kernel_pairing(phi: StepFunction, gamma: float, params: VTParams) -> complex:
    """integral of f_gamma(x) phi(x) dx with f_gamma = |x|^(gamma-n) / gamma_k(gamma)."""
    _check(phi, params)
    p, n = params.prime, params.dimension
    if not 0 < gamma < n:
        raise ValueError(f"Riesz kernel pairing needs 0 < gamma < n, got {gamma}")
    weights = cell_radial_integrals(p, n, phi.support_exp, phi.levels, gamma - n)
    total = complex(np.sum(phi.values * weights))
    if phi.tail is not None:
        t = phi.tail
        total += t.amplitude * (1 - p ** (-n)) * radial_tail_sum(p, phi.support_exp + 1, gamma + t.exponent)
    return total / gamma_k(gamma, p, n)


def radial_identity_check(x_abs, params: VTParams):
    """Both sides of |x|^alpha = c * integral |xi|^(-alpha-n) [chi(x.xi) - 1] dxi.

    ``x_abs`` is |x| (0 or a power of p).  The right side is evaluated in
    closed form: the integrand vanishes for |xi| <= 1/|x|, the first sphere
    beyond gives -p^((k-1) alpha), the rest is a geometric series.
    """
    p, n, a = params.prime, params.dimension, params.alpha
    x_abs = float(x_abs)
    if x_abs == 0:
        return 0.0, 0.0
    k = round(math.log(x_abs, p))
    if not math.isclose(float(p) ** k, x_abs, rel_tol=1e-12):
        raise ValueError("|x| must be zero or a power of p")
    integral = -(float(p) ** ((k - 1) * a)) - (1 - p ** (-n)) * radial_tail_sum(p, 2 - k, -a)
    c = (1 - p**a) / (1 - p ** (-a - n))
    return float(p) ** (k * a), c * integral


def pair_difference_integral(u: StepFunction, v: StepFunction, weight_power: float, params: VTParams) -> StepFunction:
    """x -> integral [u(x)-u(x+y)][v(x)-v(x+y)] |y|^(-weight_power) dy on the support ball.

    Each sphere |y| = p^j meets whole cells, so the integral is a finite sum of
    sphere sums plus a closed-form tail for |y| beyond the support.
    """
    u, v = u._aligned(v)
    if u.tail is not None or v.tail is not None:
        raise ValueError("compactly supported inputs required")
    p, n = u.prime, u.dimension
    M, m, K = u.support_exp, u.scale, u.levels
    cm = float(p) ** (-m * n)
    U, V = u.values, v.values
    su = [ball_sums(U, p, n, L) for L in range(K)] + [U]
    sv = [ball_sums(V, p, n, L) for L in range(K)] + [V]
    suv = [ball_sums(U * V, p, n, L) for L in range(K)] + [U * V]
    out = U * V * ((1 - p ** (-n)) * radial_tail_sum(p, M + 1, n - weight_power))
    for j in range(-m + 1, M + 1):
        L = M - j
        count = sphere_volume(p, n, j) / cm
        s_u = su[L] - su[L + 1]
        s_v = sv[L] - sv[L + 1]
        s_uv = suv[L] - suv[L + 1]
        # sum over cells b on the sphere of (u_a - u_b)(v_a - v_b)
        term = count * U * V - U * s_v - V * s_u + s_uv
        out = out + float(p) ** (-j * weight_power) * cm * term
    return StepFunction(p, n, M, m, out)


def bilinear_identity_lhs_rhs(u: StepFunction, v: StepFunction, params: VTParams):
    """Both sides of u D v + v D u - D(uv) = a * integral [u(x)-u(x+y)][v(x)-v(x+y)] |y|^(-n-alpha) dy.

    The constant a is the kernel constant; both sides are returned on the
    common support ball (the left side also carries its exterior tail, which
    is identically zero there).
    """
    if not (u.is_real and v.is_real):
        raise ValueError("the product identity is stated for real-valued functions")
    u, v = u._aligned(v)
    du = apply_spectral(u, params)
    dv = apply_spectral(v, params)
    duv = apply_spectral(u * v, params)
    lhs_vals = u.values * dv.values + v.values * du.values - duv.values
    lhs = StepFunction(u.prime, u.dimension, u.support_exp, u.scale, lhs_vals)
    rhs = pair_difference_integral(u, v, params.alpha + params.dimension, params) * kernel_constant(params)
    return lhs, rhs
