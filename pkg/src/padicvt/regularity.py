"""Boundary regularity at the origin: domain families, the measure-density
condition and Hoelder-exponent experiments.

Both example domains are unions of whole spheres around 0, so with radial
data the Dirichlet solution is constant on spheres.  :func:`solve_radial`
exploits this: one unknown per sphere of the open set, the exterior data
entering through closed-form sphere-to-sphere kernel integrals.  All
entries are formed in log space so that spheres as small as 2**-730 are
handled without underflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from scipy import stats

from .core import (
    Ball,
    OpenSetDecomposition,
    PadicPoint,
    TailDescriptor,
    abs_exponent,
    annulus_complement_measure,
    haar_measure,
)
from .operator import VTParams, apply_hypersingular, kernel_constant
from .schwartz import RadialKernel, StepFunction, radial_tail_sum


@dataclass(frozen=True)
class LambdaSequence:
    """Increasing naturals starting at 1 with ratios confined to [R_minus, R_plus]."""

    lambdas: tuple
    R_minus: Optional[float] = None
    R_plus: Optional[float] = None

    def __post_init__(self):
        lam = tuple(int(x) for x in self.lambdas)
        object.__setattr__(self, "lambdas", lam)
        if not lam or lam[0] != 1:
            raise ValueError("the sequence must start at 1")
        if any(b <= a for a, b in zip(lam, lam[1:])):
            raise ValueError("the sequence must be strictly increasing")
        ratios = [Fraction(b, a) for a, b in zip(lam, lam[1:])]
        lo = self.R_minus if self.R_minus is not None else (min(ratios) if ratios else 2)
        hi = self.R_plus if self.R_plus is not None else (max(ratios) if ratios else lo)
        object.__setattr__(self, "R_minus", lo)
        object.__setattr__(self, "R_plus", hi)
        if not 1 < lo <= hi < math.inf:
            raise ValueError(f"need 1 < R_minus <= R_plus < inf, got {lo}, {hi}")
        for r in ratios:
            if not lo <= r <= hi:
                raise ValueError(f"ratio {r} outside [{lo}, {hi}]")

    @classmethod
    def geometric(cls, ratio: int, count: int) -> "LambdaSequence":
        return cls(tuple(ratio**k for k in range(count)), ratio, ratio)

    @classmethod
    def up_to(cls, ratio: int, limit: int) -> "LambdaSequence":
        lam = [1]
        while lam[-1] * ratio <= limit:
            lam.append(lam[-1] * ratio)
        return cls(tuple(lam), ratio, ratio)


def sphere_balls(p: int, n: int, j: int) -> list:
    """The p**n - 1 balls of radius p**(j-1) tiling the sphere |x| = p**j."""
    out = []
    for digits in np.ndindex(*(p,) * n):
        if not any(digits):
            continue
        coords = [Fraction(d) * Fraction(p) ** (-j) for d in digits]
        out.append(Ball(PadicPoint.from_rational(coords, p), j - 1))
    return out


def make_sphere_union_domain(
    seq: LambdaSequence, p: int, depth: int, dimension: int = 1, require_regular: bool = True
) -> OpenSetDecomposition:
    """Union of the spheres |x| = p**-lambda_k for lambda_k <= depth."""
    if require_regular and not seq.R_minus > 2:
        raise ValueError("the regular example needs R_minus > 2 (pass require_regular=False to override)")
    balls = []
    for lam in seq.lambdas:
        if lam <= depth:
            balls.extend(sphere_balls(p, dimension, -lam))
    tail = TailDescriptor(PadicPoint.zero(p, dimension), -depth - 1, None)
    return OpenSetDecomposition(
        p, dimension, tuple(balls), "sphere-union", seq.lambdas, depth, tail, hypothesis="boundary"
    )


def make_punctured_disk(p: int, depth: int, dimension: int = 1) -> OpenSetDecomposition:
    """Z_p^n minus the origin, as the spheres |x| = p**-j for 0 <= j < depth."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    balls = []
    for j in range(depth):
        balls.extend(sphere_balls(p, dimension, -j))
    tball = Ball(PadicPoint.zero(p, dimension), -depth)
    tail = TailDescriptor(tball.center, -depth, haar_measure(tball))
    return OpenSetDecomposition(p, dimension, tuple(balls), "punctured-disk", (), depth, tail, hypothesis="boundary")


# --- measure density ------------------------------------------------------------------


@dataclass(frozen=True)
class DensityResult:
    nu: Fraction
    passed: bool
    per_annulus: tuple


def check_measure_density(omega: OpenSetDecomposition, seq: LambdaSequence, p: Optional[int] = None) -> DensityResult:
    """nu = min_k mes[(B(r_k) minus B(r_{k+1})) outside omega] / r_k**n, with r_k = p**-lambda_k."""
    p = p or omega.prime
    if p != omega.prime:
        raise ValueError("prime mismatch")
    n = omega.dimension
    lam = seq.lambdas
    if len(lam) < 2:
        raise ValueError("need at least two radii")
    values = []
    for a, b in zip(lam, lam[1:]):
        r_out, r_in = Fraction(p) ** (-a), Fraction(p) ** (-b)
        comp = annulus_complement_measure(omega, r_out, r_in)
        values.append(comp / r_out**n)
    nu = min(values)
    return DensityResult(nu, nu > 0, tuple(values))


def example_density_bound(p: int, R_minus: int, n: int = 1) -> Fraction:
    """q**-1 (1 - q**-(R_minus - 2)) with q = p**n."""
    q = Fraction(p) ** n
    return (1 - q ** (-(R_minus - 2))) / q


# --- radial solver ------------------------------------------------------------------------


def radial_spheres(omega: OpenSetDecomposition) -> Optional[set]:
    """Exponents j of the spheres |x| = p**j making up omega, or None if omega is not radial."""
    p, n = omega.prime, omega.dimension
    cover: dict = {}
    for b in omega.balls:
        e = abs_exponent(b.center)
        if e is None or e <= b.radius_exp:
            return None
        cover[e] = cover.get(e, Fraction(0)) + haar_measure(b)
    out = set()
    for j, mes in cover.items():
        if mes != Fraction(p) ** (j * n) * (1 - Fraction(p) ** (-n)):
            return None
        out.add(j)
    return out


@dataclass
class RadialSolution:
    """Sphere values of a radial solution on p**-m < |x| <= p**top."""

    prime: int
    dimension: int
    top: int
    scale: int
    exponents: np.ndarray  # sphere exponents j, descending from top
    values: np.ndarray
    in_omega: np.ndarray
    inner_value: float  # average over the ball |x| <= p**-m

    def on_sphere(self, j: int) -> float:
        return float(self.values[self.top - j])


def solve_radial(
    p: int,
    n: int,
    alpha: float,
    omega_spheres: set,
    scale: int,
    g: Optional[RadialKernel] = None,
    f: float = 0.0,
    exterior_tail: bool = False,
    top: int = 0,
) -> RadialSolution:
    """Galerkin solve over sphere indicators for radial f (constant) and g = A |x|**e.

    Spheres p**-scale < |x| <= p**top carry one value each.  The ball
    |x| <= p**-scale is exterior with the cell average of g; spheres of omega
    below it are treated as exterior too.  With ``exterior_tail`` g also
    continues beyond p**top, otherwise it is cut off there.
    """
    lp = math.log(p)
    C = kernel_constant(VTParams(alpha, p, n))
    js = np.arange(top, -scale, -1)
    inside = np.array([int(j) in omega_spheres for j in js])
    logvol = js * n * lp + math.log1p(-(p ** (-n)))
    logs = 0.5 * (logvol - js * alpha * lp)
    amp = g.amplitude if g is not None else 0.0
    e = g.exponent if g is not None else 0.0
    gvals = np.where(inside, 0.0, amp * np.exp(js * e * lp)) if g is not None else np.zeros(len(js))
    if g is not None and e <= -n:
        raise ValueError("g is not integrable at 0")
    # integral of g over |x| <= p**-scale, as a log magnitude (it can be far below 1e-308)
    if g is not None and amp != 0:
        log_inner = math.log(abs(amp)) + math.log1p(-(p ** (-n))) - scale * (e + n) * lp - math.log1p(-(p ** (-(e + n))))
        inner_avg = math.copysign(math.exp(log_inner + scale * n * lp), amp)
    else:
        log_inner, inner_avg = None, 0.0

    I = np.flatnonzero(inside)
    X = np.flatnonzero(~inside)
    diag = C * ((1 - p ** (-n)) * p ** (-alpha) / (1 - p ** (-alpha)) + p ** (-n))
    ji = js[I]
    jmax = np.maximum.outer(ji, ji)
    A = -C * np.exp(logvol[I][:, None] + logvol[I][None, :] - jmax * (alpha + n) * lp - logs[I][:, None] - logs[I][None, :])
    np.fill_diagonal(A, diag)

    b = np.zeros(len(I))
    if f:
        b += f * np.exp(logvol[I] - logs[I])
    if g is not None and amp != 0:
        # exterior spheres inside the window
        if len(X):
            jx = js[X]
            mx = np.maximum.outer(ji, jx)
            lg = np.log(np.abs(gvals[X]))
            sg = np.sign(gvals[X])
            terms = sg[None, :] * np.exp(
                logvol[I][:, None] + logvol[X][None, :] + lg[None, :] - mx * (alpha + n) * lp - logs[I][:, None]
            )
            b += C * terms.sum(axis=1)
        # the inner ball: |x - y| = |x| for x on an omega sphere
        b += C * math.copysign(1.0, amp) * np.exp(logvol[I] + log_inner - ji * (alpha + n) * lp - logs[I])
        if exterior_tail:
            if e >= alpha:
                raise ValueError("the exterior tail of g does not decay against the kernel")
            tail = amp * (1 - p ** (-n)) * radial_tail_sum(p, top + 1, e - alpha)
            b += C * tail * np.exp(logvol[I] - logs[I])
    sol = np.zeros(len(js))
    if len(I):
        scaled = scipy.linalg.solve(A, b, assume_a="pos")
        sol[I] = scaled * np.exp(-logs[I])
    values = np.where(inside, sol, gvals)
    return RadialSolution(p, n, top, scale, js, values, inside, inner_avg)


def radial_solution_to_step(sol: RadialSolution) -> StepFunction:
    """Dense step function of a radial solution (small scales only)."""
    from .schwartz import min_valuation_grid

    p, n, M, m = sol.prime, sol.dimension, sol.top, sol.scale
    v = min_valuation_grid(p, n, M + m)
    j = M - v
    vals = np.where(j > -m, sol.values[np.clip(M - j, 0, len(sol.values) - 1)], sol.inner_value)
    return StepFunction(p, n, M, m, vals)


# --- Hoelder fit -------------------------------------------------------------------------------


@dataclass
class RegularityReport:
    radii: list
    sup_abs_u: list
    gamma_fit: Optional[float]
    fit_r2: Optional[float]
    nu_observed: Optional[Fraction]
    density_condition_pass: Optional[bool]
    degenerate: bool = False
    fit_window: tuple = ()
    notes: dict = field(default_factory=dict)


def _fit(radii, sups, drop_coarse=1, drop_fine=2):
    """Least-squares slope of log sup|u| against log radius (radii descending)."""
    sel = list(range(drop_coarse, len(radii) - drop_fine))
    x = np.log([radii[i] for i in sel])
    y = np.log([sups[i] for i in sel])
    res = stats.linregress(x, y)
    return float(res.slope), float(res.rvalue**2), (sel[0], sel[-1])


def estimate_holder_exponent(
    omega: OpenSetDecomposition,
    alpha: float,
    f: float = 0.0,
    g: Optional[RadialKernel] = None,
    m_list: Sequence[int] = (730,),
    exterior_tail: bool = False,
    density_seq: Optional[LambdaSequence] = None,
    drop_coarse: int = 1,
    drop_fine: int = 2,
) -> RegularityReport:
    """Solve at each scale in ``m_list`` and fit sup|u| ~ |x|**gamma on the spheres of omega.

    f is a constant source on omega; g = A|x|**delta is the exterior datum,
    cut off outside the unit ball unless ``exterior_tail``.  The fit uses the
    finest scale, drops the coarsest sphere and the two finest ones, and
    needs at least four resolved spheres.
    """
    p, n = omega.prime, omega.dimension
    spheres = radial_spheres(omega)
    if spheres is None:
        raise ValueError("the radial solver needs omega to be a union of spheres around 0")
    top = max([0] + list(spheres))
    seq = density_seq
    if seq is None and omega.lambdas:
        seq = LambdaSequence(omega.lambdas)
    nu = passed = None
    if seq is not None:
        dens = check_measure_density(omega, seq, p)
        nu, passed = dens.nu, dens.passed
    notes = {
        "holder_seminorm": abs(g.amplitude) if g is not None else 0.0,
        "holder_exponent": g.exponent if g is not None else None,
        "holder_window_radius": float(p) ** top,
        "resolved_per_scale": {},
    }
    if (g is None or g.amplitude == 0) and f == 0:
        return RegularityReport([], [], None, None, nu, passed, degenerate=True, notes=notes)
    if g is not None and g.exponent <= 0 and not exterior_tail:
        notes["warning"] = "g does not vanish at 0"
    last = None
    for m in sorted(m_list):
        sol = solve_radial(p, n, alpha, spheres, m, g, f, exterior_tail, top)
        resolved = [j for j in sorted(spheres, reverse=True) if j > -m]
        notes["resolved_per_scale"][int(m)] = len(resolved)
        last = (m, sol, resolved)
    m, sol, resolved = last
    radii = [float(p) ** j for j in resolved]
    sups = [abs(sol.on_sphere(j)) for j in resolved]
    notes["scale"] = int(m)
    if len(resolved) - drop_coarse - drop_fine < 2 or len(resolved) < 4:
        raise ValueError(f"insufficient range: {len(resolved)} resolved spheres")
    if min(sups) == 0:
        return RegularityReport(radii, sups, None, None, nu, passed, degenerate=True, notes=notes)
    gamma, r2, window = _fit(radii, sups, drop_coarse, drop_fine)
    return RegularityReport(radii, sups, gamma, r2, nu, passed, False, window, notes)


# --- the fundamental solution on the punctured disk ------------------------------------------


def fundamental_constant(p: int, alpha: float) -> float:
    """(1 - p**-alpha) / (1 - p**(-alpha-1)), the coefficient of |x|**(alpha-1)."""
    return (1 - p ** (-alpha)) / (1 - p ** (-alpha - 1))


@dataclass
class HarmonicityReport:
    residual: float  # after subtracting the closed-form truncation term
    raw_residual: float  # sup |D u| on the checked shells, no correction
    raw_residual_unit_shell: float  # |D u| on |x| = p**-1, no correction
    truncation_bound: float
    value_at_unit_sphere: float
    expected_unit_value: float
    shells: tuple


def fundamental_solution_harmonicity_check(p: int, alpha: float, depth: int) -> HarmonicityReport:
    """Apply D^alpha to c|x|**(alpha-1) cut off inside |x| < p**-depth.

    The removed spike s near 0 changes D^alpha u at |x| > p**-depth-1 by
    exactly C |x|**(-alpha-1) * integral(s), which is subtracted in closed form.
    """
    if not 0 < alpha < 1:
        raise ValueError("need 0 < alpha < 1")
    c = fundamental_constant(p, alpha)
    e = alpha - 1
    K = depth + 1
    from .schwartz import min_valuation_grid

    v = min_valuation_grid(p, 1, K)
    j = -v.astype(float)
    vals = np.where(j >= -depth, c * np.power(float(p), j * e), 0.0)
    u = StepFunction(p, 1, 0, K, vals, RadialKernel(c, e))
    params = VTParams(alpha, p, 1)
    du = apply_hypersingular(u, params, interior_only=True).values.real
    C = kernel_constant(params)
    spike = c * (1 - 1 / p) * radial_tail_sum(p, depth + 1, -alpha)
    shells = list(range(-1, -depth + 1, -1))
    raw, corr, unit, bound = 0.0, 0.0, 0.0, 0.0
    for s in shells:
        idx = p ** (-s)  # a cell on the sphere |x| = p**s
        val = du[idx]
        term = C * float(p) ** (s * (-alpha - 1)) * spike
        bound = max(bound, abs(term))
        raw = max(raw, abs(val))
        corr = max(corr, abs(val - term))
        if s == -1:
            unit = abs(val)
    return HarmonicityReport(corr, raw, unit, bound, float(vals[1]), c, tuple(shells))
