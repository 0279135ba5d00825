"""Hodge, arithmetic and Newton polygons as exact slope lists."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .polytope import ConeData, LatticePoint


@dataclass(frozen=True)
class AtLeast:
    """An ordinate known only to be >= ``bound`` (precision window exhausted)."""

    bound: int

    def __str__(self):
        return f">={self.bound}"


Ordinate = int | Fraction | AtLeast


@dataclass(frozen=True)
class Polygon:
    """Convex piecewise-linear function with ``value(0) = 0``.

    ``slopes[j]`` is the slope between abscissae ``j`` and ``j + 1``.
    """

    slopes: tuple[Fraction, ...]

    def __init__(self, slopes: Iterable):
        object.__setattr__(self, "slopes", tuple(Fraction(s) for s in slopes))

    def __len__(self):
        return len(self.slopes)

    def value(self, m: int) -> Fraction:
        if not 0 <= m <= len(self.slopes):
            raise IndexError(f"abscissa {m} outside [0, {len(self.slopes)}]")
        return sum(self.slopes[:m], Fraction(0))

    def values(self) -> list[Fraction]:
        out = [Fraction(0)]
        for s in self.slopes:
            out.append(out[-1] + s)
        return out

    def scaled(self, factor) -> "Polygon":
        factor = Fraction(factor)
        return Polygon(s * factor for s in self.slopes)

    def truncated(self, length: int) -> "Polygon":
        return Polygon(self.slopes[:length])

    def is_convex(self) -> bool:
        return all(a <= b for a, b in zip(self.slopes, self.slopes[1:]))

    def to_csv(self) -> str:
        lines = ["m,value_numerator,value_denominator"]
        for m, v in enumerate(self.values()):
            lines.append(f"{m},{v.numerator},{v.denominator}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps([fraction_str(s) for s in self.slopes])

    @classmethod
    def from_json(cls, text: str) -> "Polygon":
        return cls(Fraction(s) for s in json.loads(text))

    @classmethod
    def from_csv(cls, text: str) -> "Polygon":
        rows = [line.split(",") for line in text.strip().splitlines()[1:]]
        values = [Fraction(int(a), int(b)) for _, a, b in rows]
        return cls(b - a for a, b in zip(values, values[1:]))


def fraction_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def modified_frac(x) -> Fraction:
    """``x - ceil(x) + 1``: the fractional part, except 1 on integers."""
    x = Fraction(x)
    return x - math.ceil(x) + 1


def r_of_set(points: Sequence[LatticePoint], p: int, D: int) -> int:
    """max over beta of #{frac'(p deg a) >= beta} - #{frac'(deg a) >= beta}.

    All modified fractional parts lie in {j/D : 1 <= j <= D}; beta above 1
    contributes the value 0.
    """
    scaled = [modified_frac(p * a.degree) for a in points]
    plain = [modified_frac(a.degree) for a in points]
    best = 0
    for j in range(1, D + 1):
        beta = Fraction(j, D)
        diff = sum(1 for x in scaled if x >= beta) - sum(1 for x in plain if x >= beta)
        best = max(best, diff)
    return best


def hodge_polygon(cone: ConeData, m_max: int) -> Polygon:
    return Polygon(a.degree for a in cone.first_points(m_max))


def arithmetic_values(cone: ConeData, p: int, m_max: int) -> list[int]:
    pts = cone.first_points(m_max)
    values = [0]
    ceil_sum = 0
    for m, a in enumerate(pts, start=1):
        ceil_sum += math.ceil(p * a.degree) - math.ceil(a.degree)
        values.append(ceil_sum + r_of_set(pts[:m], p, cone.D))
    return values


def arithmetic_polygon(cone: ConeData, p: int, m_max: int) -> Polygon:
    """Polygon with slopes ``value(m) - value(m-1)``, where ``value(m)`` sums
    ``ceil(p deg a) - ceil(deg a)`` over the first ``m`` points plus the
    correction ``r`` of that initial segment.

    Slopes are reported as computed; convexity is not enforced here.
    """
    values = arithmetic_values(cone, p, m_max)
    return Polygon(b - a for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class NewtonPointSet:
    points: tuple[tuple[int, Ordinate], ...]

    def __init__(self, points: Iterable[tuple[int, Ordinate]]):
        pts = tuple(points)
        xs = [x for x, _ in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("abscissae must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def finite(self) -> list[tuple[int, Fraction]]:
        return [(x, Fraction(y)) for x, y in self.points if not isinstance(y, AtLeast)]

    def markers(self) -> list[tuple[int, AtLeast]]:
        return [(x, y) for x, y in self.points if isinstance(y, AtLeast)]

    def rows(self) -> list[str]:
        return [f"{x},{y}" for x, y in self.points]

    def to_csv(self) -> str:
        return "i,ord_or_marker\n" + "\n".join(self.rows()) + "\n"


@dataclass(frozen=True)
class HullResult:
    polygon: Polygon
    certified_up_to: int
    vertices: tuple[tuple[int, Fraction], ...]


def _lower_hull(points: Sequence[tuple[int, Fraction]]) -> list[tuple[int, Fraction]]:
    hull: list[tuple[int, Fraction]] = []
    for pt in sorted(points):
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            if (x1 - x0) * (pt[1] - y0) - (pt[0] - x0) * (y1 - y0) <= 0:
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def _interpolate(hull: Sequence[tuple[int, Fraction]], length: int) -> list[Fraction]:
    values = []
    for m in range(length + 1):
        for (x0, y0), (x1, y1) in zip(hull, hull[1:]):
            if x0 <= m <= x1:
                values.append(y0 + (y1 - y0) * Fraction(m - x0, x1 - x0))
                break
        else:
            values.append(hull[0][1])
    return values


def lower_convex_hull(pts: NewtonPointSet) -> HullResult:
    """Lower convex hull of the finite points.

    A marker ``(i, >=N)`` is a one-sided constraint: the hull is certified up
    to the largest abscissa where adding every marker at its worst case
    ordinate ``N`` leaves the hull unchanged.
    """
    finite = pts.finite()
    if not finite:
        raise ValueError("insufficient T-precision")
    if finite[0][0] != 0:
        finite = [(0, Fraction(0))] + finite
    hull = _lower_hull(finite)
    last = hull[-1][0]
    values = _interpolate(hull, last)
    worst = finite + [(x, Fraction(m.bound)) for x, m in pts.markers() if x <= last]
    worst_values = _interpolate(_lower_hull(worst), last)
    certified = last
    for m, (a, b) in enumerate(zip(values, worst_values)):
        if a != b:
            certified = m - 1
            break
    poly = Polygon(b - a for a, b in zip(values, values[1:]))
    return HullResult(poly, certified, tuple(hull))


@dataclass(frozen=True)
class Comparison:
    ok: bool
    m: int | None = None
    p_value: Fraction | None = None
    q_value: Fraction | None = None

    def __bool__(self):
        return self.ok


def polygon_geq(P: Polygon, Q: Polygon, up_to: int) -> Comparison:
    for m in range(up_to + 1):
        a, b = P.value(m), Q.value(m)
        if a < b:
            return Comparison(False, m, a, b)
    return Comparison(True)
