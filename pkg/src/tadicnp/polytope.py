"""Exact geometry of an integral polytope containing the origin.

The degree function is the gauge of the polytope on the cone it generates:
``deg(u) = min{c >= 0 : u in c*P}``, which is the maximum of the facet forms
``normal.u / offset`` over facets not containing 0, and ``+inf`` off the cone.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import sympy

INF = math.inf
MAX_DIMENSION = 4

Vector = tuple[int, ...]


class PolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class Facet:
    """Inequality ``normal . u <= offset`` with a primitive integer normal."""

    normal: Vector
    offset: int
    vertices: frozenset[Vector] = field(compare=False)

    @property
    def contains_origin(self) -> bool:
        return self.offset == 0

    def form(self, u: Sequence[int]) -> Fraction:
        """The facet functional, equal to 1 on this facet (offset > 0 only)."""
        return Fraction(_dot(self.normal, u), self.offset)


@dataclass(frozen=True)
class Polytope:
    n: int
    vertices: tuple[Vector, ...]

    @property
    def nonzero_vertices(self) -> tuple[Vector, ...]:
        zero = (0,) * self.n
        return tuple(v for v in self.vertices if v != zero)


@dataclass(frozen=True)
class LatticePoint:
    coords: Vector
    degree: Fraction | float

    def sort_key(self):
        return (self.degree, self.coords)


def _dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def _sub(a: Sequence[int], b: Sequence[int]) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def affine_rank(points: Iterable[Sequence[int]]) -> int:
    pts = list(points)
    if not pts:
        return -1
    base = pts[0]
    rows = [_sub(p, base) for p in pts[1:]]
    if not rows:
        return 0
    return sympy.Matrix(rows).rank()


def _hyperplane(points: Sequence[Vector], n: int) -> Vector | None:
    """Primitive integer normal of the affine hyperplane through ``points``."""
    base = points[0]
    rows = [_sub(p, base) for p in points[1:]]
    if n == 1:
        return (1,)
    null = sympy.Matrix(rows).nullspace()
    if len(null) != 1:
        return None
    vec = null[0]
    den = sympy.ilcm(*[sympy.fraction(x)[1] for x in vec])
    ints = [int(x * den) for x in vec]
    g = math.gcd(*ints)
    return tuple(x // g for x in ints)


def _find_facets(points: Sequence[Vector], n: int) -> list[Facet]:
    facets: dict[tuple[Vector, int], Facet] = {}
    for subset in itertools.combinations(points, n):
        normal = _hyperplane(subset, n)
        if normal is None:
            continue
        offset = _dot(normal, subset[0])
        values = [_dot(normal, v) for v in points]
        if all(x <= offset for x in values):
            pass
        elif all(x >= offset for x in values):
            normal, offset = tuple(-x for x in normal), -offset
        else:
            continue
        key = (normal, offset)
        if key in facets:
            continue
        on = frozenset(v for v in points if _dot(normal, v) == offset)
        if affine_rank(on) != n - 1:
            continue
        facets[key] = Facet(normal, offset, on)
    return sorted(facets.values(), key=lambda f: (f.normal, f.offset))


def make_polytope(points: Iterable[Sequence[int]]) -> Polytope:
    """Canonicalize a point list into a :class:`Polytope`.

    Duplicate and non-extreme points are dropped (with a warning for the
    latter). Raises :class:`PolytopeError` when the hull is lower-dimensional,
    does not contain the origin, or the dimension exceeds ``MAX_DIMENSION``.
    """
    pts = sorted({tuple(int(x) for x in p) for p in points})
    if not pts:
        raise PolytopeError("empty point list")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise PolytopeError("points of mixed dimension")
    if n > MAX_DIMENSION:
        raise PolytopeError("dimension unsupported")
    if affine_rank(pts) < n:
        raise PolytopeError("degenerate polytope")
    facets = _find_facets(pts, n)
    extreme = []
    for v in pts:
        normals = [f.normal for f in facets if v in f.vertices]
        if normals and sympy.Matrix(normals).rank() == n:
            extreme.append(v)
    dropped = sorted(set(pts) - set(extreme))
    if dropped:
        warnings.warn(f"dropping non-extreme points {dropped}", stacklevel=2)
    if any(f.offset < 0 for f in facets):
        raise PolytopeError("polytope does not contain the origin")
    return Polytope(n, tuple(extreme))


@dataclass(frozen=True)
class ConeData:
    polytope: Polytope
    polytope_facets: tuple[Facet, ...]
    cone_facets: tuple[Vector, ...]
    D: int
    normalized_volume: int

    @property
    def n(self) -> int:
        return self.polytope.n

    @property
    def degree_facets(self) -> tuple[Facet, ...]:
        return tuple(f for f in self.polytope_facets if not f.contains_origin)

    def in_cone(self, u: Sequence[int]) -> bool:
        return all(_dot(c, u) <= 0 for c in self.cone_facets)

    def degree(self, u: Sequence[int]) -> Fraction | float:
        return degree(self, u)

    def lattice_points(self, deg_bound) -> list[LatticePoint]:
        return enumerate_lattice_points(self, deg_bound)

    def first_points(self, m: int) -> list[LatticePoint]:
        """The first ``m`` points of M(P) in canonical (degree, lex) order."""
        bound = Fraction(1)
        while True:
            pts = enumerate_lattice_points(self, bound)
            if len(pts) >= m:
                return pts[:m]
            bound *= 2


def build_cone_data(poly: Polytope) -> ConeData:
    if poly.n > MAX_DIMENSION:
        raise PolytopeError("dimension unsupported")
    if affine_rank(poly.vertices) < poly.n:
        raise PolytopeError("degenerate polytope")
    facets = _find_facets(list(poly.vertices), poly.n)
    cone = tuple(f.normal for f in facets if f.contains_origin)
    D = math.lcm(*[f.offset for f in facets if f.offset > 0])
    return ConeData(poly, tuple(facets), cone, D, normalized_volume(poly, facets))


def degree(cone: ConeData, u: Sequence[int]) -> Fraction | float:
    if not cone.in_cone(u):
        return INF
    return max(f.form(u) for f in cone.degree_facets)


def enumerate_lattice_points(cone: ConeData, deg_bound) -> list[LatticePoint]:
    """All u in C(P) with deg(u) <= deg_bound, sorted by (degree, coords)."""
    bound = Fraction(deg_bound)
    if bound < 0:
        raise ValueError("deg_bound must be nonnegative")
    verts = cone.polytope.vertices
    ranges = []
    for i in range(cone.n):
        lo = min(v[i] for v in verts) * bound
        hi = max(v[i] for v in verts) * bound
        ranges.append(range(math.floor(lo), math.ceil(hi) + 1))
    out = []
    for u in itertools.product(*ranges):
        d = degree(cone, u)
        if d <= bound:
            out.append(LatticePoint(u, d))
    out.sort(key=LatticePoint.sort_key)
    return out


def _pulling_simplices(face: frozenset[Vector], dim: int, facets: Sequence[Facet]):
    if dim == 0:
        return [[next(iter(face))]]
    apex = min(face)
    seen = set()
    out = []
    for f in facets:
        sub = face & f.vertices
        if apex in sub or sub in seen or affine_rank(sub) != dim - 1:
            continue
        seen.add(sub)
        out.extend(s + [apex] for s in _pulling_simplices(sub, dim - 1, facets))
    return out


def normalized_volume(poly: Polytope, facets: Sequence[Facet] | None = None) -> int:
    """n! times the Euclidean volume, via a pulling triangulation."""
    if affine_rank(poly.vertices) < poly.n:
        raise PolytopeError("degenerate polytope")
    if facets is None:
        facets = _find_facets(list(poly.vertices), poly.n)
    total = 0
    for simplex in _pulling_simplices(frozenset(poly.vertices), poly.n, facets):
        edges = [_sub(v, simplex[0]) for v in simplex[1:]]
        total += abs(int(sympy.Matrix(edges).det()))
    return total
