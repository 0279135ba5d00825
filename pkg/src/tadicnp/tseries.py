"""Truncated power series over Z/p^M and over unramified rings.

``TruncatedSeries`` lives in (Z/p^M)[[T]]/(T^N). ``RamifiedSeries`` has
coefficients in an :class:`~tadicnp.padic.UnramifiedRing` and is indexed by
powers of rho, where rho^D = pi; a plain pi-series is the case ``D = 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .padic import Element, UnramifiedRing, vp, vp_factorial


class PrecisionError(ValueError):
    pass


def convolve(a: Sequence[int], b: Sequence[int], length: int, modulus: int) -> list[int]:
    """Truncated product of integer sequences, reduced mod ``modulus``."""
    la, lb = min(len(a), length), min(len(b), length)
    if la == 0 or lb == 0:
        return [0] * length
    if la * lb <= 256:
        out = [0] * length
        for i in range(la):
            x = a[i]
            if x:
                for j in range(min(lb, length - i)):
                    out[i + j] += x * b[j]
        return [x % modulus for x in out]
    # Kronecker substitution: pack into one big integer per operand
    width = (2 * (modulus - 1).bit_length() + min(la, lb).bit_length() + 8) // 8
    A = int.from_bytes(b"".join(int(x).to_bytes(width, "little") for x in a[:la]), "little")
    B = int.from_bytes(b"".join(int(x).to_bytes(width, "little") for x in b[:lb]), "little")
    raw = (A * B).to_bytes((la + lb) * width, "little")
    return [
        int.from_bytes(raw[i * width : (i + 1) * width], "little") % modulus
        for i in range(length)
    ]


@dataclass(frozen=True)
class TruncatedSeries:
    p: int
    M: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        mod = self.p**self.M
        object.__setattr__(self, "coeffs", tuple(int(c) % mod for c in self.coeffs))

    @property
    def N(self) -> int:
        return len(self.coeffs)

    @property
    def modulus(self) -> int:
        return self.p**self.M

    @classmethod
    def zero(cls, p, M, N):
        return cls(p, M, (0,) * N)

    @classmethod
    def one(cls, p, M, N):
        return cls.constant(p, M, N, 1)

    @classmethod
    def constant(cls, p, M, N, c):
        return cls(p, M, (c,) + (0,) * (N - 1))

    def _check(self, other: "TruncatedSeries"):
        if (self.p, self.M, self.N) != (other.p, other.M, other.N):
            raise ValueError(
                f"series metadata mismatch: {(self.p, self.M, self.N)} vs {(other.p, other.M, other.N)}"
            )

    def __add__(self, other):
        self._check(other)
        return TruncatedSeries(self.p, self.M, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check(other)
        return TruncatedSeries(self.p, self.M, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return TruncatedSeries(self.p, self.M, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, int):
            return TruncatedSeries(self.p, self.M, tuple(a * other for a in self.coeffs))
        self._check(other)
        return TruncatedSeries(self.p, self.M, tuple(convolve(self.coeffs, other.coeffs, self.N, self.modulus)))

    __rmul__ = __mul__

    def reduce(self, M: int | None = None, N: int | None = None) -> "TruncatedSeries":
        M = self.M if M is None else M
        N = self.N if N is None else N
        if M > self.M or N > self.N:
            raise PrecisionError("cannot raise precision by reduction")
        return TruncatedSeries(self.p, M, self.coeffs[:N])

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """``self(inner(T))``; ``inner`` must have zero constant term."""
        if inner.coeffs[0] % self.p:
            raise ValueError("inner series must lie in the maximal ideal")
        self._check(inner)
        acc = TruncatedSeries.zero(self.p, self.M, self.N)
        for c in reversed(self.coeffs):
            acc = acc * inner + TruncatedSeries.constant(self.p, self.M, self.N, c)
        return acc

    def inverse(self) -> "TruncatedSeries":
        """Inverse of a series with unit constant term (Newton iteration)."""
        c0 = self.coeffs[0]
        if c0 % self.p == 0:
            raise ZeroDivisionError("constant term is not a unit")
        inv0 = pow(c0, -1, self.modulus)
        x = TruncatedSeries.constant(self.p, self.M, self.N, inv0)
        two = TruncatedSeries.constant(self.p, self.M, self.N, 2)
        for _ in range(max(self.N, self.M).bit_length() + 2):
            x = x * (two - self * x)
        return x

    def ord_T(self) -> int | None:
        """Index of the first nonzero residue; ``None`` if all vanish."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return None

    def to_json(self) -> str:
        return json.dumps({"p": self.p, "Mw": self.M, "N": self.N, "residues": [str(c) for c in self.coeffs]})

    @classmethod
    def from_json(cls, text: str) -> "TruncatedSeries":
        d = json.loads(text)
        return cls(int(d["p"]), int(d["Mw"]), tuple(int(c) for c in d["residues"]))


@dataclass(frozen=True)
class RamifiedSeries:
    """Series in rho with coefficients in an unramified ring, truncated at
    ``length`` powers of rho. ``coords[i][j]`` is coordinate ``i`` of the
    coefficient of rho^j."""

    ring: UnramifiedRing
    D: int
    coords: tuple[tuple[int, ...], ...]

    @property
    def length(self) -> int:
        return len(self.coords[0])

    @classmethod
    def zero(cls, ring: UnramifiedRing, D: int, length: int) -> "RamifiedSeries":
        return cls(ring, D, tuple((0,) * length for _ in range(ring.r)))

    @classmethod
    def from_coefficients(cls, ring, D, coeffs: Sequence[Element], length: int) -> "RamifiedSeries":
        coeffs = list(coeffs)[:length]
        coeffs += [ring.zero()] * (length - len(coeffs))
        return cls(ring, D, tuple(tuple(c[i] for c in coeffs) for i in range(ring.r)))

    @classmethod
    def constant(cls, ring, D, length, c: Element) -> "RamifiedSeries":
        return cls.from_coefficients(ring, D, [c], length)

    def coefficient(self, j: int) -> Element:
        return tuple(row[j] for row in self.coords)

    def coefficients(self) -> list[Element]:
        return [self.coefficient(j) for j in range(self.length)]

    def _check(self, other):
        if self.ring != other.ring or self.D != other.D or self.length != other.length:
            raise ValueError("ramified series metadata mismatch")

    def __add__(self, other):
        self._check(other)
        m = self.ring.pM
        return RamifiedSeries(
            self.ring, self.D,
            tuple(tuple((x + y) % m for x, y in zip(a, b)) for a, b in zip(self.coords, other.coords)),
        )

    def __sub__(self, other):
        self._check(other)
        m = self.ring.pM
        return RamifiedSeries(
            self.ring, self.D,
            tuple(tuple((x - y) % m for x, y in zip(a, b)) for a, b in zip(self.coords, other.coords)),
        )

    def __neg__(self):
        m = self.ring.pM
        return RamifiedSeries(self.ring, self.D, tuple(tuple(-x % m for x in a) for a in self.coords))

    def __mul__(self, other):
        self._check(other)
        ring, L, m = self.ring, self.length, self.ring.pM
        r = ring.r
        prods: list[list[int] | None] = [None] * (2 * r - 1)
        for i, a in enumerate(self.coords):
            if not any(a):
                continue
            for k, b in enumerate(other.coords):
                if not any(b):
                    continue
                c = convolve(a, b, L, m)
                acc = prods[i + k]
                prods[i + k] = c if acc is None else [x + y for x, y in zip(acc, c)]
        rows = [p if p is not None else [0] * L for p in prods]
        # X^r = -sum modulus[i] X^i
        mod = ring.modulus
        for top in range(2 * r - 2, r - 1, -1):
            lead = rows[top]
            if any(lead):
                for i in range(r):
                    if mod[i]:
                        row = rows[top - r + i]
                        rows[top - r + i] = [x - mod[i] * y for x, y in zip(row, lead)]
        return RamifiedSeries(ring, self.D, tuple(tuple(x % m for x in row) for row in rows[:r]))

    def scale(self, c: Element) -> "RamifiedSeries":
        return self * RamifiedSeries.constant(self.ring, self.D, self.length, c)

    def is_zero(self) -> bool:
        return not any(any(row) for row in self.coords)

    def ord(self) -> int | None:
        """Order in rho; ``None`` when every stored coefficient vanishes."""
        for j in range(self.length):
            if any(row[j] for row in self.coords):
                return j
        return None

    def ord_T(self) -> Fraction | None:
        o = self.ord()
        return None if o is None else Fraction(o, self.D)

    def shift(self, k: int, length: int | None = None) -> "RamifiedSeries":
        """Multiply by rho^k (k may be negative; dropped terms must vanish)."""
        length = self.length if length is None else length
        if k < 0 and any(any(row[:-k]) for row in self.coords):
            raise PrecisionError("negative shift would drop nonzero terms")
        rows = []
        for row in self.coords:
            if k >= 0:
                new = (0,) * k + row
            else:
                new = row[-k:]
            new = new[:length]
            rows.append(tuple(new) + (0,) * (length - len(new)))
        return RamifiedSeries(self.ring, self.D, tuple(rows))

    def spread(self, D: int, length: int) -> "RamifiedSeries":
        """Reinterpret a series in pi (this series has ``D = 1``) as one in rho."""
        if self.D != 1:
            raise ValueError("spread expects a pi-series")
        rows = []
        for row in self.coords:
            new = [0] * length
            for j, c in enumerate(row):
                if j * D < length:
                    new[j * D] = c
            rows.append(tuple(new))
        return RamifiedSeries(self.ring, D, tuple(rows))

    def to_pi_series(self) -> "RamifiedSeries":
        """Collapse rho^(jD) to pi^j; every nonzero exponent must be a multiple of D."""
        for row in self.coords:
            if any(c for j, c in enumerate(row) if j % self.D):
                raise PrecisionError("rho-exponent not a multiple of D")
        rows = tuple(tuple(row[:: self.D]) for row in self.coords)
        return RamifiedSeries(self.ring, 1, rows)


def artin_hasse_rational(p: int, N: int) -> list[Fraction]:
    """E(t) = exp(sum_i t^(p^i)/p^i) to order N, exactly over Q."""
    g = [Fraction(0)] * N
    pk = 1
    while pk < N:
        g[pk] = Fraction(1, pk)
        pk *= p
    e = [Fraction(0)] * N
    if N:
        e[0] = Fraction(1)
    for m in range(1, N):
        e[m] = sum(k * g[k] * e[m - k] for k in range(1, m + 1)) / m
    return e


def artin_hasse(p: int, Mw: int, N: int) -> TruncatedSeries:
    mod = p**Mw
    out = []
    for c in artin_hasse_rational(p, N):
        if c.denominator % p == 0:
            raise ArithmeticError("Artin-Hasse coefficient is not p-integral")
        out.append(c.numerator * pow(c.denominator, -1, mod))
    return TruncatedSeries(p, Mw, tuple(out))


def pi_from_T(p: int, Mw: int, N: int) -> TruncatedSeries:
    """The series pi(T) with E(pi) = 1 + T, by reversion of E(t) - 1."""
    lam = artin_hasse(p, Mw, N).coeffs
    mod = p**Mw
    pi = [0] * N
    if N > 1:
        pi[1] = 1
    # coefficient j of E(pi(T)) - 1 is pi_j + (terms in pi_1..pi_{j-1}); solve for pi_j
    for j in range(2, N):
        cur = TruncatedSeries(p, Mw, tuple(pi))
        power = cur
        total = 0
        for i in range(2, j + 1):
            power = power * cur
            total += lam[i] * power.coeffs[j]
        pi[j] = -total % mod
    return TruncatedSeries(p, Mw, tuple(pi))


def binomial_power(c: int, Mc: int, p: int, Mw: int, N: int) -> TruncatedSeries:
    """(1 + T)^c mod (p^Mw, T^N) for c known mod p^Mc."""
    need = Mw + vp_factorial(max(N - 1, 0), p)
    if Mc < need:
        raise PrecisionError(f"p-precision too low for T-precision: need M_c >= {need}")
    c %= p**Mc
    return TruncatedSeries(p, Mw, tuple(math.comb(c, i) for i in range(N)))


@dataclass(frozen=True)
class SPolynomial:
    """Coefficients c_0..c_K of a power series in s, each a TruncatedSeries."""

    coeffs: tuple[TruncatedSeries, ...]

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i):
        return self.coeffs[i]

    def __mul__(self, other: "SPolynomial") -> "SPolynomial":
        K = min(self.K, other.K)
        out = []
        for m in range(K + 1):
            acc = self.coeffs[0] * other.coeffs[m]
            for i in range(1, m + 1):
                acc = acc + self.coeffs[i] * other.coeffs[m - i]
            out.append(acc)
        return SPolynomial(tuple(out))

    def rescale(self, factor: int) -> "SPolynomial":
        """Substitute s -> factor * s."""
        return SPolynomial(tuple(c * pow(factor, i, c.modulus) for i, c in enumerate(self.coeffs)))

    def inverse(self) -> "SPolynomial":
        if self.coeffs[0].coeffs[0] % self.coeffs[0].p:
            c0inv = self.coeffs[0].inverse()
        else:
            raise ZeroDivisionError("constant term not invertible")
        out = [c0inv]
        for m in range(1, self.K + 1):
            acc = self.coeffs[m] * out[0]
            for i in range(1, m):
                acc = acc + self.coeffs[m - i] * out[i]
            out.append(-(acc * c0inv))
        return SPolynomial(tuple(out))

    def power(self, e: int) -> "SPolynomial":
        base = self if e >= 0 else self.inverse()
        e = abs(e)
        c0 = self.coeffs[0]
        result = SPolynomial(tuple(
            TruncatedSeries.one(c0.p, c0.M, c0.N) if i == 0 else TruncatedSeries.zero(c0.p, c0.M, c0.N)
            for i in range(self.K + 1)
        ))
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def reduce(self, M=None, N=None, K=None) -> "SPolynomial":
        K = self.K if K is None else K
        return SPolynomial(tuple(c.reduce(M, N) for c in self.coeffs[: K + 1]))

    def __eq__(self, other):
        return isinstance(other, SPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)


def exp_divided_sum(
    b: Sequence[TruncatedSeries],
    scale: Sequence[int],
    M_target: int,
) -> SPolynomial:
    """exp(sum_k scale_k * b_k * s^k / k) truncated at s^K, reported mod p^M_target.

    Uses ``m c_m = sum_{k<=m} scale_k b_k c_{m-k}``. Each division by ``m``
    costs ``v_p(m)`` digits, so the inputs need ``Mw >= M_target + v_p(K!)``;
    divisibility is asserted at every step.
    """
    K = len(b)
    if K == 0:
        raise ValueError("need at least one term; use K >= 1")
    p, Mw, N = b[0].p, b[0].M, b[0].N
    need = M_target + vp_factorial(K, p)
    if Mw < need:
        raise PrecisionError(f"working precision {Mw} below required {need}")
    mod = p**Mw
    w = [bk * (s % mod) for bk, s in zip(b, scale)]
    c: list[list[int]] = [[1] + [0] * (N - 1)]
    lost = 0
    for m in range(1, K + 1):
        acc = [0] * N
        for k in range(1, m + 1):
            term = convolve(w[k - 1].coeffs, c[m - k], N, mod)
            acc = [x + y for x, y in zip(acc, term)]
        v = vp(m, p)
        lost += v
        pv = p**v
        unit_inv = pow(m // pv, -1, mod)
        # acc is correct mod p^(Mw - lost + v); it must be divisible by p^v there
        check = p ** (Mw - lost + v)
        if any((x % check) % pv for x in acc):
            raise ArithmeticError("non-integral C-function")
        c.append([(x % check) // pv * unit_inv % mod for x in acc])
    out = tuple(TruncatedSeries(p, M_target, tuple(row)) for row in c)
    return SPolynomial(out)
