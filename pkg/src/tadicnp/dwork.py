"""Truncated Dwork operator and its characteristic series.

The b-iterate of the semi-linear operator is linear over Z_q and equals
``Psi_p^b`` composed with multiplication by
``G(x) = prod_{i<b} E_f^{sigma^i}(x^{p^i})``. On the basis
``e_u = pi^deg(u) x^u`` its matrix entry is::

    entry(u, w) = pi^(deg w - deg u) * G_{q u - w}

Fractional pi-powers are carried as integer powers of rho, rho^D = pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .linalg import berkowitz
from .padic import Element, FiniteField, UnramifiedRing, teichmuller
from .polygons import AtLeast, NewtonPointSet
from .polytope import ConeData, LatticePoint
from .sums import LaurentData
from .tseries import (
    PrecisionError,
    RamifiedSeries,
    SPolynomial,
    TruncatedSeries,
    artin_hasse,
    pi_from_T,
)

Vector = tuple[int, ...]

MAX_BASIS = 120


class TruncationError(RuntimeError):
    pass


def coefficient_ring(p: int, b: int, M: int) -> UnramifiedRing:
    return FiniteField(p, b).lifted_ring(M)


@lru_cache(maxsize=64)
def _lambdas(p: int, M: int, N: int) -> tuple[int, ...]:
    return artin_hasse(p, M, N).coeffs


@dataclass
class EfExpansion:
    """Monomial -> pi-series (a RamifiedSeries with D = 1) of E_f^{sigma^twist}."""

    coeffs: dict[Vector, RamifiedSeries]
    twist: int
    precision: int

    def ord_T(self, w: Vector) -> Fraction | None:
        s = self.coeffs.get(w)
        return None if s is None else s.ord_T()


def _mul_expansions(a: dict, b: dict) -> dict:
    out: dict[Vector, RamifiedSeries] = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            prod = va * vb
            if prod.is_zero():
                continue
            key = tuple(x + y for x, y in zip(ka, kb))
            out[key] = out[key] + prod if key in out else prod
    return {k: v for k, v in out.items() if not v.is_zero()}


def expand_Ef(
    f: LaurentData,
    ring: UnramifiedRing,
    precision: int,
    twist: int = 0,
    cone: ConeData | None = None,
    deg_bound=None,
) -> EfExpansion:
    """E_f^{sigma^twist}(x^(p^twist)) = prod_u sum_j lambda_j (pi a_u^(p^twist))^j x^(j p^twist u),
    modulo pi^precision."""
    p = ring.p
    lam = _lambdas(p, ring.M, precision)
    scale = p**twist
    result: dict[Vector, RamifiedSeries] = {(0,) * f.n: RamifiedSeries.constant(ring, 1, precision, ring.one())}
    for u, a in f.terms:
        c = ring.pow(teichmuller(a, ring), scale)
        factor = {}
        cj = ring.one()
        for j in range(precision):
            coeff = ring.scale(cj, lam[j])
            if any(coeff):
                key = tuple(j * scale * x for x in u)
                series = RamifiedSeries.from_coefficients(ring, 1, [ring.zero()] * j + [coeff], precision)
                factor[key] = factor[key] + series if key in factor else series
            cj = ring.mul(cj, c)
        result = _mul_expansions(result, factor)
    if deg_bound is not None and cone is not None:
        result = {k: v for k, v in result.items() if cone.degree(k) <= deg_bound}
    return EfExpansion(result, twist, precision)


def frobenius_product(f: LaurentData, ring: UnramifiedRing, b: int, precision: int) -> dict[Vector, RamifiedSeries]:
    """G(x) = prod_{i<b} E_f^{sigma^i}(x^{p^i}) modulo pi^precision."""
    G = expand_Ef(f, ring, precision, 0).coeffs
    for i in range(1, b):
        G = _mul_expansions(G, expand_Ef(f, ring, precision, i).coeffs)
    return G


@dataclass
class PsiMatrix:
    basis: list[LatticePoint]
    entries: list[list[RamifiedSeries]]
    raw: dict[tuple[Vector, Vector], RamifiedSeries]
    p: int
    b: int
    D: int
    N: int
    expansion_precision: int
    ring: UnramifiedRing

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def q(self) -> int:
        return self.p**self.b


def build_psi_matrix(
    f: LaurentData,
    cone: ConeData,
    basis: list[LatticePoint],
    p: int,
    b: int,
    M: int,
    N: int,
    G: dict | None = None,
    expansion_precision: int | None = None,
) -> PsiMatrix:
    """Matrix of the b-iterate on ``basis``, entries mod (p^M, pi^N)."""
    D = cone.D
    ring = coefficient_ring(p, b, M)
    top = max((pt.degree for pt in basis), default=Fraction(0))
    need = N + math.ceil(top)
    NE = need if expansion_precision is None else expansion_precision
    if NE < need:
        raise PrecisionError(f"expansion precision {NE} below {need}")
    if G is None:
        G = frobenius_product(f, ring, b, NE)
    q = p**b
    L = N * D
    LE = NE * D
    zero = RamifiedSeries.zero(ring, D, L)
    entries = []
    raw = {}
    for u in basis:
        row = []
        for w in basis:
            key = tuple(q * x - y for x, y in zip(u.coords, w.coords))
            g = G.get(key)
            if g is None:
                row.append(zero)
                continue
            g = _resize(g, NE)
            raw[(u.coords, w.coords)] = g
            shift = int(D * (w.degree - u.degree))
            try:
                row.append(g.spread(D, LE).shift(shift, L))
            except PrecisionError as exc:
                raise TruncationError(f"entry ({u.coords},{w.coords}): {exc}") from exc
        entries.append(row)
    return PsiMatrix(list(basis), entries, raw, p, b, D, N, NE, ring)


def _resize(s: RamifiedSeries, length: int) -> RamifiedSeries:
    if s.length == length:
        return s
    rows = tuple(tuple(row[:length]) + (0,) * (length - len(row)) for row in s.coords)
    return RamifiedSeries(s.ring, s.D, rows)


def char_series(mat: PsiMatrix, K: int) -> list[RamifiedSeries]:
    """det(1 - s * entries) up to s^K via Berkowitz (no divisions)."""
    L = mat.N * mat.D
    one = RamifiedSeries.constant(mat.ring, mat.D, L, mat.ring.one())
    zero = RamifiedSeries.zero(mat.ring, mat.D, L)
    coeffs = berkowitz(mat.entries, one, zero, max_degree=K)
    return coeffs + [zero] * (K + 1 - len(coeffs))


def to_T_series(cs: list[RamifiedSeries], p: int, M: int, N: int) -> SPolynomial:
    """Collapse rho to pi, project Z_q -> Z_p (asserting Galois invariance)
    and substitute pi = pi(T)."""
    pi_T = pi_from_T(p, M, N)
    out = []
    for m, c in enumerate(cs):
        try:
            s = c.to_pi_series()
        except PrecisionError as exc:
            raise TruncationError(f"coefficient {m}: truncation too small or bug ({exc})") from exc
        if any(any(row) for row in s.coords[1:]):
            raise TruncationError(f"coefficient {m} not in Z_p: truncation too small or bug")
        pi_series = TruncatedSeries(p, M, s.coords[0][:N])
        out.append(pi_series.compose(pi_T))
    return SPolynomial(tuple(out))


@dataclass
class StabilizedSeries:
    deg_bound: Fraction
    series: SPolynomial
    analytic_bound: Fraction
    history: list[tuple[str, int, bool]] = field(default_factory=list)
    matrix: PsiMatrix | None = None

    def as_dict(self):
        return {
            "deg_bound": str(self.deg_bound),
            "analytic_bound": str(self.analytic_bound),
            "basis_size": None if self.matrix is None else self.matrix.size,
            "history": [{"deg_bound": d, "basis_size": s, "unchanged": u} for d, s, u in self.history],
        }


def degree_levels(cone: ConeData, upto) -> list[Fraction]:
    return sorted({pt.degree for pt in cone.lattice_points(upto)})


def stabilize_truncation(
    f: LaurentData,
    cone: ConeData,
    p: int,
    b: int,
    M: int,
    N: int,
    K: int,
) -> StabilizedSeries:
    """Grow the basis one degree level at a time until the first K
    coefficients stop changing, and the level covers every row that can be
    nonzero mod pi^N (rows have order >= (p-1) deg u). The result is then
    re-verified one level further."""
    if K == 0:
        one = TruncatedSeries.one(p, M, N)
        return StabilizedSeries(Fraction(0), SPolynomial((one,)), Fraction(0))
    analytic = Fraction(N, p - 1)
    # consecutive levels differ by at most 1 (multiples of a vertex), so this
    # window holds the needed level and at least two more
    levels = degree_levels(cone, analytic + 2)
    needed = max(d for d in levels if (p - 1) * d < N)
    final_cap = levels[levels.index(needed) + 2]
    NE = N + math.ceil(final_cap)
    ring = coefficient_ring(p, b, M)
    G = frobenius_product(f, ring, b, NE)
    history = []
    prev = None
    for level in levels:
        basis = cone.lattice_points(level)
        if len(basis) > MAX_BASIS:
            raise TruncationError(f"basis size {len(basis)} exceeds cap {MAX_BASIS} at deg bound {level}")
        mat = build_psi_matrix(f, cone, basis, p, b, M, N, G=G, expansion_precision=NE)
        try:
            series = to_T_series(char_series(mat, K), p, M, N)
        except TruncationError:
            # small truncations need not be Galois-stable when b > 1
            if level >= needed:
                raise
            series = None
        unchanged = prev is not None and series is not None and series == prev[1]
        history.append((str(level), len(basis), unchanged))
        if unchanged and prev[0] >= needed:
            return StabilizedSeries(prev[0], series, needed, history, prev[2])
        if level >= final_cap:
            break
        prev = (level, series, mat)
    raise TruncationError(f"no stabilization up to deg bound {final_cap}; history {history}")


def np_from_cbm(points: NewtonPointSet, b: int) -> NewtonPointSet:
    """View of a Z_p-module determinant's points at abscissae b*m, reindexed to m."""
    return NewtonPointSet((x // b, y) for x, y in points.points if x % b == 0)


def chain_bound(cone: ConeData, u: Vector, w: Vector, p: int, b: int):
    """Lower bound for ord_pi of G_{q u - w}.

    For b = 1 this is ceil(deg(p u - w)). For b > 1 it minimises
    sum_k ceil(deg(p u_{k+1} - u_k)) over chains w = u_0, ..., u_b = u, with
    the intermediate points restricted to a finite degree window; chains
    leaving the window cost at least p * window - deg(w).
    """
    q = p**b
    direct = cone.degree(tuple(q * x - y for x, y in zip(u, w)))
    if direct == math.inf:
        return math.inf
    if b == 1:
        return math.ceil(direct)
    deg_w = cone.degree(w)
    window = 2 * max(cone.degree(u), deg_w) + 2
    mids = [pt.coords for pt in cone.lattice_points(window)]

    def step(a, c):
        d = cone.degree(tuple(p * x - y for x, y in zip(a, c)))
        return math.inf if d == math.inf else math.ceil(d)

    cost = {v: step(v, w) for v in mids}
    for _ in range(b - 2):
        cost = {v: min(cost[t] + step(v, t) for t in mids) for v in mids}
    best = min(cost[t] + step(u, t) for t in mids)
    outside = math.ceil(p * window - deg_w)
    return min(best, outside)


@dataclass
class EntryBoundReport:
    checked: int = 0
    zero_entries: int = 0
    violations: list[dict] = field(default_factory=list)
    expansion_violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.expansion_violations

    def as_dict(self):
        return {
            "ok": self.ok,
            "entries_checked": self.checked,
            "structurally_zero_entries": self.zero_entries,
            "violations": self.violations,
            "expansion_violations": self.expansion_violations,
        }


def verify_entry_bounds(mat: PsiMatrix, cone: ConeData, f: LaurentData | None = None) -> EntryBoundReport:
    """Check ord_T of every stored unscaled entry G_{qu-w} against the ceiling bound."""
    rep = EntryBoundReport()
    for u in mat.basis:
        for w in mat.basis:
            g = mat.raw.get((u.coords, w.coords))
            bound = chain_bound(cone, u.coords, w.coords, mat.p, mat.b)
            if g is None:
                rep.zero_entries += 1
                continue
            rep.checked += 1
            o = g.ord()
            if bound == math.inf:
                if o is not None:
                    rep.violations.append({"u": u.coords, "w": w.coords, "ord": o, "bound": "inf"})
                continue
            if o is not None and o < bound:
                rep.violations.append({"u": list(u.coords), "w": list(w.coords), "ord": o, "bound": bound})
    if f is not None:
        exp = expand_Ef(f, mat.ring, mat.expansion_precision)
        for v, s in exp.coeffs.items():
            o = s.ord()
            d = cone.degree(v)
            if d == math.inf or (o is not None and o < math.ceil(d)):
                rep.expansion_violations.append({"w": list(v), "ord": o, "bound": str(d)})
    return rep


def dwork_newton_points(series: SPolynomial) -> NewtonPointSet:
    pts = []
    for i, c in enumerate(series.coeffs):
        o = c.ord_T()
        pts.append((i, AtLeast(c.N) if o is None else o))
    return NewtonPointSet(pts)
