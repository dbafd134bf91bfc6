"""Exact arithmetic, balls and Haar measure on Q_p^n with the max-norm.

Every absolute value, radius and measure in this module is an exact
``fractions.Fraction``.  Points are stored as finite p-adic digit expansions;
rationals whose expansion does not terminate are truncated at a working
precision and flagged as inexact.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

DEFAULT_PRECISION = 64


def valuation(x, p: int) -> int:
    """p-adic valuation of a nonzero integer or Fraction."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero is +infinity")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _int_valuation(a: int, p: int) -> int:
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


@dataclass(frozen=True)
class PadicPoint:
    """A point of Q_p^n.

    ``coords`` holds one ``(valuation, digits)`` pair per coordinate, meaning
    ``sum(d_i * p**(valuation + i))``.  The zero coordinate is ``(0, ())``.
    """

    prime: int
    coords: tuple
    exact: bool = True

    def __post_init__(self):
        if self.prime < 2:
            raise ValueError("prime must be >= 2")
        if not self.coords:
            raise ValueError("a point needs at least one coordinate")
        for v, digits in self.coords:
            if any(not 0 <= d < self.prime for d in digits):
                raise ValueError(f"digit out of range for p={self.prime}: {digits}")
            if digits and (digits[0] == 0 or digits[-1] == 0):
                raise ValueError("non-canonical digit vector (leading/trailing zero)")

    @classmethod
    def from_rational(cls, values, p: int, precision: int = DEFAULT_PRECISION) -> "PadicPoint":
        """Build a point from one rational or a sequence of rationals."""
        if isinstance(values, (int, Fraction)):
            values = [values]
        coords = []
        exact = True
        for x in values:
            x = Fraction(x)
            if x == 0:
                coords.append((0, ()))
                continue
            v = valuation(x, p)
            unit = x / Fraction(p) ** v
            mod = p**precision
            r = unit.numerator * pow(unit.denominator, -1, mod) % mod
            digits = []
            rest = r
            while rest:
                digits.append(rest % p)
                rest //= p
            if Fraction(r) != unit:
                exact = False
            while digits and digits[-1] == 0:
                digits.pop()
            coords.append((v, tuple(digits)))
        return cls(p, tuple(coords), exact)

    @classmethod
    def zero(cls, p: int, dimension: int = 1) -> "PadicPoint":
        return cls(p, tuple((0, ()) for _ in range(dimension)))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def to_rationals(self) -> tuple:
        return self._rationals

    @functools.cached_property
    def _rationals(self) -> tuple:
        p = self.prime
        out = []
        for v, digits in self.coords:
            unit = 0
            for d in reversed(digits):
                unit = unit * p + d
            out.append(Fraction(unit) * Fraction(p) ** v)
        return tuple(out)

    def _combine(self, other: "PadicPoint", op) -> "PadicPoint":
        _check_compatible(self, other)
        vals = [op(a, b) for a, b in zip(self.to_rationals(), other.to_rationals())]
        pt = PadicPoint.from_rational(vals, self.prime)
        if not (self.exact and other.exact):
            pt = PadicPoint(pt.prime, pt.coords, False)
        return pt

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self):
        return PadicPoint.from_rational([-x for x in self.to_rationals()], self.prime)

    def scale(self, c) -> "PadicPoint":
        """Multiply every coordinate by the rational ``c``."""
        return PadicPoint.from_rational([Fraction(c) * x for x in self.to_rationals()], self.prime)

    def dot(self, other: "PadicPoint") -> "PadicPoint":
        """The bilinear pairing x . xi as a one-dimensional point."""
        _check_compatible(self, other)
        s = sum((a * b for a, b in zip(self.to_rationals(), other.to_rationals())), Fraction(0))
        return PadicPoint.from_rational(s, self.prime)

    def fractional_part(self) -> Fraction:
        """Sum of the negative-power digit terms (n = 1 only)."""
        if self.dimension != 1:
            raise ValueError("fractional part is defined for one coordinate")
        v, digits = self.coords[0]
        p = self.prime
        return sum(
            (Fraction(d) * Fraction(p) ** (v + i) for i, d in enumerate(digits) if v + i < 0),
            Fraction(0),
        )

    def is_zero(self) -> bool:
        return all(not digits for _, digits in self.coords)

    def __str__(self):
        parts = []
        for v, digits in self.coords:
            parts.append(encode_coordinate(v, digits, self.prime))
        return f"PadicPoint(p={self.prime}, [{', '.join(parts)}])"


def _check_compatible(a: PadicPoint, b: PadicPoint):
    if a.prime != b.prime:
        raise ValueError(f"prime mismatch: {a.prime} vs {b.prime}")
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: {a.dimension} vs {b.dimension}")


def abs_value(x: PadicPoint) -> Fraction:
    """Normalized max-norm |x| = max_j p**(-v_j), exact."""
    best = Fraction(0)
    for v, digits in x.coords:
        if digits:
            best = max(best, Fraction(x.prime) ** (-v))
    return best


def abs_exponent(x: PadicPoint) -> Optional[int]:
    """log_p |x|, or None for x = 0."""
    vals = [v for v, digits in x.coords if digits]
    if not vals:
        return None
    return -min(vals)


def distance(x: PadicPoint, y: PadicPoint) -> Fraction:
    _check_compatible(x, y)
    p = x.prime
    best = Fraction(0)
    for a, b in zip(x.to_rationals(), y.to_rationals()):
        if a != b:
            best = max(best, Fraction(p) ** (-valuation(a - b, p)))
    return best


# --- balls -----------------------------------------------------------------


class BallRelation(enum.Enum):
    DISJOINT = "Disjoint"
    EQUAL = "Equal"
    A_CONTAINS_B = "AContainsB"
    B_CONTAINS_A = "BContainsA"


@dataclass(frozen=True)
class Ball:
    """Closed ball {x : |x - center| <= p**radius_exp}."""

    center: PadicPoint
    radius_exp: int

    @property
    def prime(self) -> int:
        return self.center.prime

    @property
    def dimension(self) -> int:
        return self.center.dimension

    @property
    def radius(self) -> Fraction:
        return Fraction(self.prime) ** self.radius_exp

    def contains_point(self, x: PadicPoint) -> bool:
        return distance(self.center, x) <= self.radius

    def contains(self, other: "Ball") -> bool:
        return ball_relation(self, other) in (BallRelation.EQUAL, BallRelation.A_CONTAINS_B)


class Cell(Ball):
    """A ball used as a quadrature atom: the coset c + p**scale * Z_p**n."""

    @property
    def scale(self) -> int:
        return -self.radius_exp

    def children(self) -> list:
        """The p**n disjoint cells of the next finer scale."""
        p, n = self.prime, self.dimension
        base = self.center.to_rationals()
        step = Fraction(p) ** (-self.radius_exp)
        out = []
        for offsets in _product(range(p), n):
            c = [b + k * step for b, k in zip(base, offsets)]
            out.append(Cell(PadicPoint.from_rational(c, p), self.radius_exp - 1))
        return out


def _product(values, n):
    if n == 0:
        yield ()
        return
    for head in values:
        for tail in _product(values, n - 1):
            yield (head,) + tail


def ball_relation(a: Ball, b: Ball) -> BallRelation:
    """Ultrametric dichotomy: two balls are nested or disjoint, never overlapping."""
    _check_compatible(a.center, b.center)
    d = distance(a.center, b.center)
    ra, rb = a.radius, b.radius
    if ra == rb:
        return BallRelation.EQUAL if d <= ra else BallRelation.DISJOINT
    if ra > rb:
        return BallRelation.A_CONTAINS_B if d <= ra else BallRelation.DISJOINT
    return BallRelation.B_CONTAINS_A if d <= rb else BallRelation.DISJOINT


def haar_measure(b: Ball) -> Fraction:
    return Fraction(b.prime) ** (b.dimension * b.radius_exp)


def ball_at_zero(p: int, radius_exp: int, dimension: int = 1) -> Ball:
    return Ball(PadicPoint.zero(p, dimension), radius_exp)


# --- open sets -------------------------------------------------------------


class TailAmbiguousError(ValueError):
    """Raised when a result depends on balls omitted by a truncation."""


@dataclass(frozen=True)
class TailDescriptor:
    """Where the omitted balls of a truncated family live.

    All omitted balls lie inside ``B(center, p**radius_exp)``; ``measure`` is
    their total measure when known exactly, else None.
    """

    center: PadicPoint
    radius_exp: int
    measure: Optional[Fraction]

    @property
    def ball(self) -> Ball:
        return Ball(self.center, self.radius_exp)


@dataclass(frozen=True)
class OpenSetDecomposition:
    """A (possibly truncated) disjoint union of balls."""

    prime: int
    dimension: int
    balls: tuple
    family: str = "explicit"
    lambdas: tuple = ()
    depth: Optional[int] = None
    tail: Optional[TailDescriptor] = None
    hypothesis: Optional[str] = None  # "boundary" | "translation-invariant"

    def __post_init__(self):
        for b in self.balls:
            if b.prime != self.prime or b.dimension != self.dimension:
                raise ValueError("ball prime/dimension does not match the decomposition")
        balls = self.balls
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                if ball_relation(balls[i], balls[j]) is not BallRelation.DISJOINT:
                    raise ValueError(f"balls {i} and {j} are not disjoint")
        if self.hypothesis not in (None, "boundary", "translation-invariant"):
            raise ValueError(f"unknown hypothesis tag {self.hypothesis!r}")

    @classmethod
    def empty(cls, p: int, dimension: int = 1) -> "OpenSetDecomposition":
        return cls(p, dimension, ())

    @property
    def truncated(self) -> bool:
        return self.tail is not None

    def measure(self) -> Fraction:
        """Exact measure of the listed balls (tail excluded)."""
        return sum((haar_measure(b) for b in self.balls), Fraction(0))

    def contains_point(self, x: PadicPoint) -> bool:
        return any(b.contains_point(x) for b in self.balls)


def _ball_intersection_measure(ball: Ball, outer: Ball, inner: Ball) -> Fraction:
    """mes(ball ∩ (outer \\ inner)) for inner ⊆ outer, exact."""
    rel_out = ball_relation(ball, outer)
    if rel_out is BallRelation.DISJOINT:
        return Fraction(0)
    if rel_out in (BallRelation.EQUAL, BallRelation.A_CONTAINS_B):
        piece = haar_measure(outer)
    else:
        piece = haar_measure(ball)
    rel_in = ball_relation(ball, inner)
    if rel_in is BallRelation.DISJOINT:
        return piece
    if rel_in is BallRelation.B_CONTAINS_A:
        return Fraction(0)
    # ball contains (or equals) inner
    return piece - haar_measure(inner)


def annulus_complement_measure(omega: OpenSetDecomposition, r_out: Fraction, r_in: Fraction) -> Fraction:
    """mes[(B(r_out) \\ B(r_in)) ∩ complement(omega)], exact.

    Radii are given as values (powers of p).  A truncated decomposition whose
    tail meets the annulus raises :class:`TailAmbiguousError` unless the tail's
    omitted measure is 0 or fills the tail ball.
    """
    p, n = omega.prime, omega.dimension
    r_out, r_in = Fraction(r_out), Fraction(r_in)
    if not r_in < r_out:
        raise ValueError("need r_in < r_out")
    e_out, e_in = _power_exponent(r_out, p), _power_exponent(r_in, p)
    outer = ball_at_zero(p, e_out, n)
    inner = ball_at_zero(p, e_in, n)
    total = haar_measure(outer) - haar_measure(inner)
    covered = sum((_ball_intersection_measure(b, outer, inner) for b in omega.balls), Fraction(0))
    if omega.tail is not None:
        tball = omega.tail.ball
        overlap = _ball_intersection_measure(tball, outer, inner)
        if overlap:
            tm = omega.tail.measure
            if tm == 0:
                pass
            elif tm is not None and tm == haar_measure(tball):
                covered += overlap
            else:
                raise TailAmbiguousError(
                    f"truncated tail B(.., p^{tball.radius_exp}) overlaps the annulus "
                    f"p^{e_in} < |x| <= p^{e_out}"
                )
    return total - covered


def _power_exponent(r: Fraction, p: int) -> int:
    if r <= 0:
        raise ValueError("radius must be positive")
    k = valuation(r, p)
    if Fraction(p) ** k != r:
        raise ValueError(f"{r} is not a power of {p}")
    return k


def boundary_accumulation_points(
    omega: OpenSetDecomposition, resolution: int, min_count: int = 3
) -> list:
    """Limit points of the ball centers, resolved to cells of radius p**-resolution.

    A cell is reported when it holds at least ``min_count`` centers of listed
    balls smaller than the cell, or when it contains the tail ball of a
    truncated family (infinitely many omitted balls).  Cells lying inside a
    listed ball are excluded: limit points never belong to the open set.
    The confidence depth of the answer is ``omega.depth``.
    """
    p, n = omega.prime, omega.dimension
    counts: dict = {}
    reps: dict = {}

    def key_of(point: PadicPoint):
        return tuple(_truncate_rational(x, p, resolution) for x in point.to_rationals())

    for b in omega.balls:
        if b.radius_exp < -resolution:
            k = key_of(b.center)
            counts[k] = counts.get(k, 0) + 1
            reps.setdefault(k, PadicPoint.from_rational(list(k), p))
    if omega.tail is not None and omega.tail.radius_exp <= -resolution:
        k = key_of(omega.tail.center)
        counts[k] = math.inf
        reps[k] = omega.tail.center
    out = []
    for k in sorted(counts, key=lambda t: tuple(float(x) for x in t)):
        if counts[k] < min_count:
            continue
        cell = Ball(reps[k], -resolution)
        if any(b.contains(cell) for b in omega.balls):
            continue
        out.append(reps[k])
    return out


def _truncate_rational(x: Fraction, p: int, resolution: int) -> Fraction:
    """Representative of x modulo p**resolution * Z_p made of its coarse digits."""
    if x == 0:
        return Fraction(0)
    pt = PadicPoint.from_rational(x, p)
    v, digits = pt.coords[0]
    return sum(
        (Fraction(d) * Fraction(p) ** (v + i) for i, d in enumerate(digits) if v + i < resolution),
        Fraction(0),
    )


# --- grid helpers ------------------------------------------------------------


def point_to_index(x: PadicPoint, support_exp: int, levels: int) -> tuple:
    """Index of the scale-(levels - support_exp) cell holding x on the grid of B(p**support_exp).

    The cell with index a has center a * p**-support_exp per coordinate.
    """
    p = x.prime
    out = []
    for v, digits in x.coords:
        a = 0
        for i, d in enumerate(digits):
            e = v + i + support_exp
            if e < 0:
                raise ValueError("point lies outside the support ball")
            if e < levels:
                a += d * p**e
        out.append(a)
    return tuple(out)


def index_to_point(index: Sequence[int], p: int, support_exp: int) -> PadicPoint:
    return PadicPoint.from_rational([Fraction(a) * Fraction(p) ** (-support_exp) for a in index], p)


# --- JSON ------------------------------------------------------------------


def encode_coordinate(v: int, digits: Iterable[int], p: int) -> str:
    """``"<valuation>:<digits>"``, least significant digit first.

    Digits are written without separators for p <= 10 and dot-separated above.
    """
    digits = list(digits)
    if not digits:
        return "0:"
    sep = "" if p <= 10 else "."
    return f"{v}:{sep.join(str(d) for d in digits)}"


def decode_coordinate(text: str, p: int) -> tuple:
    v_text, _, d_text = text.partition(":")
    if not d_text:
        return (0, ())
    if "." in d_text or p > 10:
        digits = tuple(int(t) for t in d_text.split("."))
    else:
        digits = tuple(int(c) for c in d_text)
    return (int(v_text), digits)


def point_to_json(x: PadicPoint) -> list:
    return [encode_coordinate(v, d, x.prime) for v, d in x.coords]


def point_from_json(data, p: int) -> PadicPoint:
    if isinstance(data, str):
        data = [data]
    return PadicPoint(p, tuple(decode_coordinate(t, p) for t in data))


def ball_to_json(b: Ball) -> dict:
    return {"center": point_to_json(b.center), "radius_exp": b.radius_exp}


def ball_from_json(data: dict, p: int) -> Ball:
    return Ball(point_from_json(data["center"], p), int(data["radius_exp"]))


def decomposition_to_json(omega: OpenSetDecomposition) -> dict:
    out = {
        "prime": omega.prime,
        "dimension": omega.dimension,
        "family": omega.family,
        "balls": [ball_to_json(b) for b in omega.balls],
        "lambda": list(omega.lambdas),
        "depth": omega.depth,
    }
    if omega.hypothesis:
        out["hypothesis"] = omega.hypothesis
    return out


def decomposition_from_json(data: dict) -> OpenSetDecomposition:
    """Rebuild a decomposition; named families are regenerated from their parameters."""
    p = int(data["prime"])
    n = int(data.get("dimension", 1))
    family = data.get("family", "explicit")
    if family == "punctured-disk":
        from .regularity import make_punctured_disk

        return make_punctured_disk(p, int(data["depth"]), dimension=n)
    if family == "sphere-union":
        from .regularity import LambdaSequence, make_sphere_union_domain

        seq = LambdaSequence(tuple(int(x) for x in data["lambda"]))
        depth = data.get("depth")
        return make_sphere_union_domain(
            seq, p, depth if depth is not None else max(seq.lambdas), dimension=n, require_regular=False
        )
    balls = tuple(ball_from_json(b, p) for b in data.get("balls", []))
    return OpenSetDecomposition(p, n, balls, hypothesis=data.get("hypothesis"))
