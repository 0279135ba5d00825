"""Direct evaluation of T-adic exponential sums and the C- and L-functions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .ledger import BudgetError, PrecisionLedger
from .padic import Element, FieldTower, build_field_tower, teichmuller, vp
from .polygons import AtLeast, HullResult, NewtonPointSet, lower_convex_hull
from .polytope import ConeData
from .tseries import SPolynomial, TruncatedSeries, binomial_power, exp_divided_sum

Vector = tuple[int, ...]


@dataclass(frozen=True)
class LaurentData:
    """f = sum_u a_u x^u with a_u in F_q, given in the power basis of the
    canonical F_q modulus."""

    n: int
    b: int
    terms: tuple[tuple[Vector, Element], ...]

    @classmethod
    def from_mapping(cls, n: int, b: int, terms: Mapping[Sequence[int], Sequence[int]]) -> "LaurentData":
        out = []
        for u, a in sorted((tuple(u), tuple(a)) for u, a in terms.items()):
            a = tuple(a) + (0,) * (b - len(a))
            if len(u) != n or len(a) != b:
                raise ValueError(f"bad term {u}: {a}")
            if any(a):
                out.append((u, a))
        return cls(n, b, tuple(out))

    @property
    def support(self) -> list[Vector]:
        return [u for u, _ in self.terms]

    def validate(self, cone: ConeData, p: int) -> None:
        if cone.n != self.n:
            raise ValueError("dimension mismatch between f and the polytope")
        for u, a in self.terms:
            if cone.degree(u) > 1:
                raise ValueError(f"monomial {u} lies outside the polytope")
            if any(not 0 <= c < p for c in a):
                raise ValueError(f"coefficient of {u} not reduced mod {p}")
        present = set(self.support)
        missing = [v for v in cone.polytope.nonzero_vertices if v not in present]
        if missing:
            raise ValueError(f"vertices {missing} need nonzero coefficients")

    def frobenius_twist(self, p: int) -> "LaurentData":
        """Coefficients a_u -> a_u^p."""
        from .padic import FiniteField

        F = FiniteField(p, self.b)
        return LaurentData(self.n, self.b, tuple((u, F.pow(a, p)) for u, a in self.terms))


@dataclass
class CFunctionApprox:
    C: SPolynomial
    L: SPolynomial | None
    ledger: PrecisionLedger
    sums: list[TruncatedSeries] = field(default_factory=list, repr=False)

    @property
    def p(self):
        return self.ledger.p

    @property
    def q(self):
        return self.ledger.q


def witt_trace_at_point(f: LaurentData, x: Sequence[Element], tower: FieldTower, M_c: int) -> int:
    """Tr_{Z_{q^k}/Z_p} of sum_u teich(a_u) teich(x)^u, mod p^M_c."""
    ring = tower.ring(M_c)
    if any(tower.big.is_zero_mod_p(xi) for xi in x):
        raise ValueError("point has a zero coordinate")
    lifts = [teichmuller(xi, ring) for xi in x]
    total = ring.zero()
    for u, a in f.terms:
        term = teichmuller(tower.embed(a), ring)
        for t, e in zip(lifts, u):
            term = ring.mul(term, ring.pow(t, e))
        total = ring.add(total, term)
    return ring.trace(total)


@lru_cache(maxsize=32)
def _tower(p: int, b: int, k: int) -> FieldTower:
    return build_field_tower(p, b, k)


def power_traces(tower: FieldTower, M_c: int) -> np.ndarray:
    """Tr(Gamma^j) mod p^M_c for j in [0, Q-1), Gamma = teich(primitive element).

    Uses Tr(Gamma^j) = t . A^j e_0 with A the multiplication matrix of Gamma,
    advanced a block of columns at a time.
    """
    ring = tower.ring(M_c)
    P, r, Q1 = ring.pM, ring.r, tower.Q - 1
    gamma = teichmuller(tower.gamma, ring)
    dtype = np.int64 if r * P * P < 2**62 else object
    block = min(Q1, 4096)
    cols = []
    x = ring.one()
    for _ in range(block):
        cols.append(x)
        x = ring.mul(x, gamma)
    W = np.array(cols, dtype=dtype).T
    step = np.array(ring.mult_matrix(x), dtype=dtype)
    tvec = np.array(ring.trace_vector, dtype=dtype)
    out = np.empty(Q1, dtype=dtype)
    for start in range(0, Q1, block):
        chunk = (tvec @ W) % P
        stop = min(start + block, Q1)
        out[start:stop] = chunk[: stop - start]
        W = (step @ W) % P
    return out


def trace_histogram(f: LaurentData, k: int, ledger: PrecisionLedger) -> dict[int, int]:
    """Multiplicity of each value Tr(f(x)) mod p^M_c over (F_{q^k}^x)^n.

    Points are x_j = gamma^(e_j), enumerated row-major over (e_1, ..., e_n).
    """
    p, b, n = ledger.p, ledger.b, f.n
    tower = _tower(p, b, k)
    P = p**ledger.M_c
    Q1 = tower.Q - 1
    if Q1**n > ledger.point_count:
        raise BudgetError("point budget exceeded")
    traces = power_traces(tower, ledger.M_c)
    logs = [(np.array(u, dtype=np.int64), tower.log(a)) for u, a in f.terms]
    e_last = np.arange(Q1, dtype=np.int64)
    hist: dict[int, int] = {}
    for head in itertools.product(range(Q1), repeat=n - 1):
        total = np.zeros(Q1, dtype=traces.dtype)
        for u, ell in logs:
            offset = ell + sum(int(ui) * ei for ui, ei in zip(u[:-1], head))
            idx = (offset + int(u[-1]) * e_last) % Q1
            total = (total + traces[idx]) % P
        values, counts = np.unique(total, return_counts=True)
        for v, c in zip(values.tolist(), counts.tolist()):
            hist[v] = hist.get(v, 0) + c
    return hist


def s_sum(f: LaurentData, k: int, ledger: PrecisionLedger) -> TruncatedSeries:
    """S_f(k, T) mod (p^Mw, T^N)."""
    p, Mw, N = ledger.p, ledger.Mw, ledger.N
    mod = p**Mw
    acc = [0] * N
    for c, count in trace_histogram(f, k, ledger).items():
        row = binomial_power(c, ledger.M_c, p, Mw, N).coeffs
        for i in range(N):
            acc[i] += count * row[i]
    return TruncatedSeries(p, Mw, tuple(x % mod for x in acc))


def s_sum_naive(f: LaurentData, k: int, ledger: PrecisionLedger) -> TruncatedSeries:
    """Slow reference: Teichmueller-lift every coordinate of every point."""
    p, Mw, N = ledger.p, ledger.Mw, ledger.N
    tower = _tower(p, ledger.b, k)
    units = [a for a in tower.big.elements() if any(a)]
    acc = TruncatedSeries.zero(p, Mw, N)
    for x in itertools.product(units, repeat=f.n):
        c = witt_trace_at_point(f, x, tower, ledger.M_c)
        acc = acc + binomial_power(c, ledger.M_c, p, Mw, N)
    return acc


def all_sums(f: LaurentData, ledger: PrecisionLedger) -> list[TruncatedSeries]:
    return [s_sum(f, k, ledger) for k in range(1, ledger.K + 1)]


def c_function(f: LaurentData, ledger: PrecisionLedger, sums=None, with_L: bool = True) -> CFunctionApprox:
    """C_f = exp(sum_k -(q^k-1)^(-n) S_f(k,T) s^k/k), mod (p^M_target, T^N, s^(K+1))."""
    sums = all_sums(f, ledger) if sums is None else sums
    q, n, mod = ledger.q, f.n, ledger.p**ledger.Mw
    scale = [-pow((q**k - 1) ** n, -1, mod) for k in range(1, ledger.K + 1)]
    C = exp_divided_sum(sums, scale, ledger.M_target)
    L = l_function(f, ledger, sums) if with_L else None
    return CFunctionApprox(C, L, ledger, list(sums))


def l_function(f: LaurentData, ledger: PrecisionLedger, sums=None) -> SPolynomial:
    sums = all_sums(f, ledger) if sums is None else sums
    return exp_divided_sum(sums, [1] * ledger.K, ledger.M_target)


@dataclass
class IdentityReport:
    ok: bool
    first_failure: tuple[str, int, int] | None
    c_to_l_cutoff: int
    checked: str

    def as_dict(self):
        return {
            "ok": self.ok,
            "first_failure": self.first_failure,
            "c_to_l_cutoff_j": self.c_to_l_cutoff,
            "checked_modulo": self.checked,
        }


def _first_difference(a: SPolynomial, b: SPolynomial):
    for i, (x, y) in enumerate(zip(a.coeffs, b.coeffs)):
        for j, (u, v) in enumerate(zip(x.coeffs, y.coeffs)):
            if u != v:
                return i, j
    return None


def check_lc_identities(C: SPolynomial, L: SPolynomial, n: int, q: int) -> IdentityReport:
    """Both product identities linking L_f and C_f, exactly mod the common precision.

    The second product is infinite; factors with q^j = 0 mod p^M are 1, so
    j runs up to the first such index.
    """
    p, M = C[0].p, C[0].M
    lhs_L = None
    for i in range(n + 1):
        factor = C.rescale(q**i).power((-1) ** (n - i + 1) * math.comb(n, i))
        lhs_L = factor if lhs_L is None else lhs_L * factor
    diff = _first_difference(lhs_L, L)
    if diff is not None:
        return IdentityReport(False, ("L=prod C", *diff), 0, f"p^{M}, T^{C[0].N}, s^{C.K + 1}")
    bq = vp(q, p)
    cutoff = -(-M // bq)
    rhs_C = None
    for j in range(cutoff):
        factor = L.rescale(q**j).power((-1) ** (n - 1) * math.comb(n + j - 1, j))
        rhs_C = factor if rhs_C is None else rhs_C * factor
    diff = _first_difference(rhs_C, C)
    if diff is not None:
        return IdentityReport(False, ("C=prod L", *diff), cutoff, f"p^{M}, T^{C[0].N}, s^{C.K + 1}")
    return IdentityReport(True, None, cutoff, f"p^{M}, T^{C[0].N}, s^{C.K + 1}")


def ord_or_marker(series: TruncatedSeries):
    o = series.ord_T()
    return AtLeast(series.N) if o is None else o


def newton_points(C: SPolynomial) -> NewtonPointSet:
    return NewtonPointSet((i, ord_or_marker(c)) for i, c in enumerate(C.coeffs))


def newton_polygon_of_C(cfa: CFunctionApprox) -> tuple[NewtonPointSet, HullResult]:
    pts = newton_points(cfa.C)
    return pts, lower_convex_hull(pts)


def cyclotomic_in_y(p: int, m: int) -> list[int]:
    """Phi_{p^m}(1 + y) as integer coefficients, low degree first (monic)."""
    step = p ** (m - 1)
    deg = (p - 1) * step
    out = [0] * (deg + 1)
    for i in range(p):
        e = i * step
        for j in range(e + 1):
            out[j] += math.comb(e, j)
    return out


def specialize_cyclotomic(C: SPolynomial, m: int) -> NewtonPointSet:
    """Points (i, ord_{pi_m}(c_i(pi_m))) with T -> pi_m = zeta_{p^m} - 1.

    c_i(pi_m) is reduced in Z/p^M[y]/(Phi_{p^m}(1+y)); an element
    sum_k e_k y^k (k < phi) has order min_k (k + phi * v_p(e_k)). Orders are
    certified below min(N, phi * M).
    """
    p, M, N = C[0].p, C[0].M, C[0].N
    mod = p**M
    phi = (p - 1) * p ** (m - 1)
    cyc = cyclotomic_in_y(p, m)
    window = min(N, phi * M)
    pts = []
    for i, c in enumerate(C.coeffs):
        red = list(c.coeffs) + [0] * max(0, phi - N)
        for top in range(len(red) - 1, phi - 1, -1):
            lead = red[top] % mod
            if lead:
                for j in range(phi + 1):
                    red[top - phi + j] -= lead * cyc[j]
        red = [x % mod for x in red[:phi]]
        orders = [k + phi * vp(e, p) for k, e in enumerate(red) if e]
        o = min(orders) if orders else None
        pts.append((i, o if o is not None and o < window else AtLeast(window)))
    return NewtonPointSet(pts)
