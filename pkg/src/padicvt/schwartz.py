"""Locally constant, compactly supported functions on Q_p^n.

A :class:`StepFunction` is stored densely: the support ball B(p**M) is cut
into cells of radius p**-m and ``values`` holds one complex number per cell,
as an array of shape ``(p**(M+m),) * n``.  The cell with multi-index ``a``
is ``a * p**-M + p**m Z_p**n``.  With this ordering the cells of a coarser
ball share their low digits, so ball sums are reshape-and-sum operations and
the Fourier transform is a plain DFT.

An optional radial ``tail`` gives the values ``amplitude * |x|**exponent``
outside the support ball.  Operator images carry such tails.
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    Ball,
    Cell,
    OpenSetDecomposition,
    PadicPoint,
    abs_exponent,
    index_to_point,
    point_from_json,
    point_to_index,
    point_to_json,
)


@dataclass(frozen=True)
class RadialKernel:
    """The radial function amplitude * |x|**exponent (amplitude may be complex)."""

    amplitude: complex
    exponent: float

    def on_sphere(self, p: int, j: int) -> float:
        """Value on the sphere |x| = p**j."""
        return self.amplitude * math.exp(j * self.exponent * math.log(p))

    def __call__(self, radius: float) -> float:
        return self.amplitude * radius**self.exponent


def sphere_volume(p: int, n: int, j: int) -> float:
    """Haar measure of {|x| = p**j} in Q_p^n."""
    return p ** (j * n) * (1.0 - p ** (-n))


def radial_tail_sum(p: int, start: int, rate: float) -> float:
    """sum_{j >= start} p**(j*rate) for rate < 0, in closed form."""
    if rate >= 0:
        raise ValueError(f"divergent radial series (rate {rate} >= 0)")
    return p ** (start * rate) / (1.0 - p**rate)


# --- grid helpers ------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _valuations_1d(p: int, levels: int) -> np.ndarray:
    """v_p(a) for a in [0, p**levels), with v(0) = levels."""
    a = np.arange(p**levels, dtype=np.int64)
    v = np.zeros(a.shape, dtype=np.int64)
    for k in range(1, levels + 1):
        v += (a % p**k == 0)
    v.flags.writeable = False
    return v


@functools.lru_cache(maxsize=None)
def min_valuation_grid(p: int, n: int, levels: int) -> np.ndarray:
    """min_j v_p(a_j) over the n-dimensional index grid."""
    v = _valuations_1d(p, levels)
    grid = v
    for axis in range(1, n):
        grid = np.minimum.outer(grid, v)
    grid = np.asarray(grid)
    grid.flags.writeable = False
    return grid


def abs_exponent_grid(p: int, n: int, support_exp: int, levels: int) -> np.ndarray:
    """log_p |center| per cell; the zero cell gets support_exp - levels (its radius)."""
    return support_exp - min_valuation_grid(p, n, levels)


def ball_sums(values: np.ndarray, p: int, n: int, level: int) -> np.ndarray:
    """Sum of values over the ball of radius p**(M - level) around each cell."""
    size = values.shape[0]
    inner = p**level
    outer = size // inner
    shape = []
    for _ in range(n):
        shape += [outer, inner]
    s = values.reshape(shape).sum(axis=tuple(range(0, 2 * n, 2)))
    return np.tile(s, (outer,) * n)


def _levels_of(size: int, p: int) -> int:
    k = round(math.log(size, p)) if size > 1 else 0
    if p**k != size:
        raise ValueError(f"grid size {size} is not a power of {p}")
    return k


# --- step functions ------------------------------------------------------------


class StepFunction:
    """Dense cell representation of a Bruhat-Schwartz function (plus optional radial tail)."""

    def __init__(self, prime: int, dimension: int, support_exp: int, scale: int, values, tail: Optional[RadialKernel] = None):
        levels = support_exp + scale
        if levels < 0:
            raise ValueError("scale must satisfy support_exp + scale >= 0")
        values = np.array(values, dtype=np.complex128)
        expected = (prime**levels,) * dimension
        if values.shape != expected:
            raise ValueError(f"values have shape {values.shape}, expected {expected}")
        values.flags.writeable = False
        self.prime = prime
        self.dimension = dimension
        self.support_exp = support_exp
        self.scale = scale
        self.values = values
        self.tail = tail

    # constructors

    @classmethod
    def zeros(cls, p: int, n: int, support_exp: int, scale: int) -> "StepFunction":
        size = p ** (support_exp + scale)
        return cls(p, n, support_exp, scale, np.zeros((size,) * n))

    @classmethod
    def indicator(cls, ball: Ball, support_exp: Optional[int] = None, scale: Optional[int] = None) -> "StepFunction":
        """1_ball on the grid of B(p**support_exp) at the given scale."""
        p, n = ball.prime, ball.dimension
        e = abs_exponent(ball.center)
        if support_exp is None:
            support_exp = max(ball.radius_exp, e if e is not None else ball.radius_exp)
        if scale is None:
            scale = -ball.radius_exp
        return cls.from_balls([(ball, 1.0)], p, n, support_exp, scale)

    @classmethod
    def from_balls(cls, terms, p: int, n: int, support_exp: int, scale: int) -> "StepFunction":
        """Sum of value * 1_ball over (ball, value) pairs, on a fixed grid."""
        levels = support_exp + scale
        vals = np.zeros((p**levels,) * n, dtype=np.complex128)
        for ball, value in terms:
            vals[ball_mask(ball, support_exp, levels)] += value
        return cls(p, n, support_exp, scale, vals)

    # basic properties

    @property
    def levels(self) -> int:
        return self.support_exp + self.scale

    @property
    def cell_measure(self) -> float:
        return float(self.prime) ** (-self.scale * self.dimension)

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    @property
    def support_ball(self) -> Ball:
        return Ball(PadicPoint.zero(self.prime, self.dimension), self.support_exp)

    def grid_key(self) -> tuple:
        return (self.prime, self.dimension, self.support_exp, self.scale)

    def cell(self, index) -> Cell:
        return Cell(index_to_point(index, self.prime, self.support_exp), -self.scale)

    @property
    def terms(self) -> list:
        """(Cell, value) pairs for the nonzero cells."""
        out = []
        for idx in zip(*np.nonzero(self.values)):
            idx = tuple(int(i) for i in idx)
            out.append((self.cell(idx), complex(self.values[idx])))
        return out

    def abs_exponents(self) -> np.ndarray:
        return abs_exponent_grid(self.prime, self.dimension, self.support_exp, self.levels)

    def with_values(self, values, tail="keep") -> "StepFunction":
        return StepFunction(
            self.prime, self.dimension, self.support_exp, self.scale, values, self.tail if tail == "keep" else tail
        )

    def __call__(self, x: PadicPoint) -> complex:
        e = abs_exponent(x)
        if e is not None and e > self.support_exp:
            return complex(self.tail.on_sphere(self.prime, e)) if self.tail else 0j
        return complex(self.values[point_to_index(x, self.support_exp, self.levels)])

    def __repr__(self):
        return (
            f"StepFunction(p={self.prime}, n={self.dimension}, support_exp={self.support_exp}, "
            f"scale={self.scale}, cells={self.values.size}, tail={self.tail})"
        )

    # regridding

    def refine(self, scale: int) -> "StepFunction":
        if scale < self.scale:
            raise ValueError("refine() cannot coarsen; use canonical()")
        vals = self.values
        p, n = self.prime, self.dimension
        if scale > self.scale:
            vals = np.tile(vals, (p ** (scale - self.scale),) * n)
        return StepFunction(p, n, self.support_exp, scale, vals, self.tail)

    def extend(self, support_exp: int) -> "StepFunction":
        """Same function on a larger support ball; tail values fill the new shells."""
        if support_exp < self.support_exp:
            raise ValueError("extend() cannot shrink the support")
        f = self
        p, n = self.prime, self.dimension
        while f.support_exp < support_exp:
            new_exp = f.support_exp + 1
            size = p ** (f.levels + 1)
            fill = f.tail.on_sphere(p, new_exp) if f.tail else 0.0
            vals = np.full((size,) * n, fill, dtype=np.complex128)
            vals[(slice(None, None, p),) * n] = f.values
            f = StepFunction(p, n, new_exp, f.scale, vals, f.tail)
        return f

    def regrid(self, support_exp: int, scale: int) -> "StepFunction":
        return self.extend(support_exp).refine(scale)

    def canonical(self) -> "StepFunction":
        """Coarsest scale and smallest support ball representing the same function."""
        f = self
        p, n = self.prime, self.dimension
        while f.levels > 0:
            size = f.values.shape[0]
            blocks = f.values.reshape(sum(([p, size // p] for _ in range(n)), []))
            first = blocks[(0, slice(None)) * n]
            if np.all(blocks == first.reshape(sum(([1, size // p] for _ in range(n)), []))):
                f = StepFunction(p, n, f.support_exp, f.scale - 1, first, f.tail)
            else:
                break
        while f.levels > 0 and f.tail is None:
            inner = f.values[(slice(None, None, p),) * n]
            mask = np.ones(f.values.shape, dtype=bool)
            mask[(slice(None, None, p),) * n] = False
            if np.any(f.values[mask] != 0):
                break
            f = StepFunction(p, n, f.support_exp - 1, f.scale, inner, None)
        return f

    # algebra

    def _aligned(self, other: "StepFunction"):
        if (self.prime, self.dimension) != (other.prime, other.dimension):
            raise ValueError("prime/dimension mismatch")
        M = max(self.support_exp, other.support_exp)
        m = max(self.scale, other.scale)
        return self.regrid(M, m), other.regrid(M, m)

    def __add__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        a, b = self._aligned(other)
        tail = _add_tails(a.tail, b.tail)
        return StepFunction(a.prime, a.dimension, a.support_exp, a.scale, a.values + b.values, tail)

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            a, b = self._aligned(other)
            tail = None
            if a.tail is not None and b.tail is not None:
                tail = RadialKernel(a.tail.amplitude * b.tail.amplitude, a.tail.exponent + b.tail.exponent)
            return StepFunction(a.prime, a.dimension, a.support_exp, a.scale, a.values * b.values, tail)
        c = complex(other)
        tail = None
        if self.tail is not None:
            tail = RadialKernel(self.tail.amplitude * (c.real if c.imag == 0 else c), self.tail.exponent)
        return StepFunction(self.prime, self.dimension, self.support_exp, self.scale, self.values * c, tail)

    __rmul__ = __mul__

    def conj(self) -> "StepFunction":
        tail = None
        if self.tail is not None:
            tail = RadialKernel(np.conj(self.tail.amplitude), self.tail.exponent)
        return self.with_values(np.conj(self.values), tail)

    def abs2(self) -> "StepFunction":
        tail = None
        if self.tail is not None:
            tail = RadialKernel(abs(self.tail.amplitude) ** 2, 2 * self.tail.exponent)
        return StepFunction(self.prime, self.dimension, self.support_exp, self.scale, np.abs(self.values) ** 2, tail)


def _add_tails(a: Optional[RadialKernel], b: Optional[RadialKernel]) -> Optional[RadialKernel]:
    if a is None:
        return b
    if b is None:
        return a
    if a.exponent != b.exponent:
        raise ValueError("cannot add radial tails with different exponents")
    return RadialKernel(a.amplitude + b.amplitude, a.exponent)


def ball_mask(ball: Ball, support_exp: int, levels: int) -> np.ndarray:
    """Boolean mask of the grid cells inside ``ball``."""
    p, n = ball.prime, ball.dimension
    scale = levels - support_exp
    if ball.radius_exp < -scale:
        raise ValueError(f"ball of radius p^{ball.radius_exp} is finer than the grid scale {scale}")
    if ball.radius_exp > support_exp:
        raise ValueError("ball is larger than the support ball")
    center = point_to_index(ball.center, support_exp, levels)
    step = p ** (support_exp - ball.radius_exp)
    a = np.arange(p**levels)
    mask = np.ones((p**levels,) * n, dtype=bool)
    for axis, c in enumerate(center):
        shape = [1] * n
        shape[axis] = -1
        mask &= ((a - c) % step == 0).reshape(shape)
    return mask


def domain_mask(omega: OpenSetDecomposition, support_exp: int, levels: int) -> np.ndarray:
    mask = np.zeros((omega.prime**levels,) * omega.dimension, dtype=bool)
    for b in omega.balls:
        mask |= ball_mask(b, support_exp, levels)
    return mask


# --- character, integral, Fourier transform -----------------------------------


def character(x: PadicPoint, xi: Optional[PadicPoint] = None) -> complex:
    """The rank-zero additive character exp(2 pi i {x}_p); with ``xi``, evaluated at x . xi."""
    if xi is not None:
        x = x.dot(xi)
    frac = x.fractional_part()
    return cmath.exp(2j * math.pi * (frac.numerator / frac.denominator))


def integrate(f: StepFunction) -> complex:
    """Haar integral with compensated summation; exact cell measures."""
    flat = f.values.ravel()
    re = math.fsum(flat.real.tolist())
    im = math.fsum(flat.imag.tolist())
    total = complex(re, im) * f.cell_measure
    if f.tail is not None:
        p, n = f.prime, f.dimension
        rate = f.tail.exponent + n
        total += f.tail.amplitude * (1 - p ** (-n)) * radial_tail_sum(p, f.support_exp + 1, rate)
    return total


def l2_norm(f: StepFunction) -> float:
    return math.sqrt(integrate(f.abs2()).real)


def _require_compact(f: StepFunction):
    if f.tail is not None:
        raise ValueError("the Fourier transform is only defined here for compactly supported step functions")


def fourier(f: StepFunction) -> StepFunction:
    """(F f)(xi) = integral of chi(x xi) f(x) dx, exactly on cells.

    Support B(p**M) and scale m swap: the transform lives on B(p**m) and is
    constant on cosets of p**M Z_p**n.
    """
    _require_compact(f)
    n = f.dimension
    vals = np.fft.ifftn(f.values) * float(f.prime) ** (f.support_exp * n)
    return StepFunction(f.prime, n, f.scale, f.support_exp, vals)


def inverse_fourier(g: StepFunction) -> StepFunction:
    """f(x) = integral of chi(-x xi) g(xi) dxi."""
    _require_compact(g)
    n = g.dimension
    vals = np.fft.fftn(g.values) * float(g.prime) ** (-g.scale * n)
    return StepFunction(g.prime, n, g.scale, g.support_exp, vals)


# --- pointwise operations -------------------------------------------------------


def add(f, g):
    return f + g


def scale(f, c):
    return f * c


def multiply(f, g):
    return f * g


def conjugate(f):
    return f.conj()


def restrict(f: StepFunction, region) -> StepFunction:
    """f * 1_region for a Ball or an OpenSetDecomposition."""
    if isinstance(region, Ball):
        region = OpenSetDecomposition(region.prime, region.dimension, (region,))
    if region.balls:
        finest = max(-b.radius_exp for b in region.balls)
        widest = max(max(b.radius_exp, abs_exponent(b.center) or b.radius_exp) for b in region.balls)
        f = f.regrid(max(f.support_exp, widest), max(f.scale, finest))
    mask = domain_mask(region, f.support_exp, f.levels)
    return StepFunction(f.prime, f.dimension, f.support_exp, f.scale, np.where(mask, f.values, 0), None)


def translate(f: StepFunction, a: PadicPoint) -> StepFunction:
    """(tau_a f)(x) = f(x - a)."""
    e = abs_exponent(a)
    if e is not None and e > f.support_exp:
        f = f.extend(e)
    shift = point_to_index(a, f.support_exp, f.levels)
    vals = f.values
    for axis, s in enumerate(shift):
        vals = np.roll(vals, s, axis=axis)
    return f.with_values(vals)


# --- JSON --------------------------------------------------------------------------


def step_function_to_json(f: StepFunction) -> dict:
    terms = []
    for idx in zip(*np.nonzero(f.values)):
        idx = tuple(int(i) for i in idx)
        v = complex(f.values[idx])
        terms.append(
            {
                "cell_center": point_to_json(index_to_point(idx, f.prime, f.support_exp)),
                "cell_radius_exp": -f.scale,
                "re": v.real,
                "im": v.imag,
            }
        )
    out = {
        "prime": f.prime,
        "dimension": f.dimension,
        "support_exp": f.support_exp,
        "scale": f.scale,
        "terms": terms,
    }
    if f.tail is not None:
        amp = complex(f.tail.amplitude)
        out["tail"] = {"amplitude": amp.real, "exponent": f.tail.exponent}
        if amp.imag:
            out["tail"]["amplitude_im"] = amp.imag
    return out


def step_function_from_json(data: dict) -> StepFunction:
    p, n = int(data["prime"]), int(data.get("dimension", 1))
    M, m = int(data["support_exp"]), int(data["scale"])
    levels = M + m
    vals = np.zeros((p**levels,) * n, dtype=np.complex128)
    for t in data.get("terms", []):
        center = point_from_json(t["cell_center"], p)
        r = int(t.get("cell_radius_exp", -m))
        value = complex(t.get("re", 0.0), t.get("im", 0.0))
        vals[ball_mask(Ball(center, r), M, levels)] += value
    tail = None
    if data.get("tail"):
        t = data["tail"]
        amp = complex(float(t["amplitude"]), float(t.get("amplitude_im", 0.0)))
        tail = RadialKernel(amp.real if amp.imag == 0 else amp, float(t["exponent"]))
    return StepFunction(p, n, M, m, vals, tail)
