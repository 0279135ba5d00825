"""Z/p^M, unramified rings Z_{p^r} mod p^M, finite fields and Teichmueller lifts.

Ring elements are tuples of ``r`` integers: coordinates in the power basis
``1, X, ..., X^(r-1)`` where ``X`` is a root of the ring's monic modulus.
A finite field is the same structure at precision ``M = 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache

import sympy

Element = tuple[int, ...]

DEFAULT_FIELD_BUDGET = 10**7


def vp(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_factorial(n: int, p: int) -> int:
    """Legendre's formula."""
    total, pk = 0, p
    while pk <= n:
        total += n // pk
        pk *= p
    return total


@lru_cache(maxsize=None)
def smallest_irreducible(p: int, r: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree ``r`` over F_p.

    Returned low-degree first, monic coefficient included. The order compares
    the coefficient of X^(r-1) first and the constant term last.
    """
    if not sympy.isprime(p):
        raise ValueError(f"{p} is not prime")
    x = sympy.Symbol("x")
    for high_first in itertools.product(range(p), repeat=r):
        if r == 1 or sympy.Poly([1, *high_first], x, modulus=p).is_irreducible:
            return tuple(reversed(high_first)) + (1,)
    raise AssertionError("no irreducible polynomial found")


@dataclass(frozen=True)
class UnramifiedRing:
    """Z_p[X]/(modulus) reduced mod p^M."""

    p: int
    M: int
    modulus: tuple[int, ...]

    @property
    def r(self) -> int:
        return len(self.modulus) - 1

    @cached_property
    def pM(self) -> int:
        return self.p**self.M

    @property
    def size(self) -> int:
        return self.p**self.r

    def zero(self) -> Element:
        return (0,) * self.r

    def one(self) -> Element:
        return self.scalar(1)

    def gen(self) -> Element:
        if self.r == 1:
            return ((-self.modulus[0]) % self.pM,)
        return self.reduce([0, 1])

    def scalar(self, c: int) -> Element:
        return (c % self.pM,) + (0,) * (self.r - 1)

    def reduce(self, coeffs) -> Element:
        c = [x % self.pM for x in coeffs]
        r, m = self.r, self.modulus
        for top in range(len(c) - 1, r - 1, -1):
            lead = c[top]
            if lead:
                for i in range(r):
                    c[top - r + i] = (c[top - r + i] - lead * m[i]) % self.pM
        c = c[:r] + [0] * (r - len(c))
        return tuple(c)

    def add(self, a: Element, b: Element) -> Element:
        return tuple((x + y) % self.pM for x, y in zip(a, b))

    def sub(self, a: Element, b: Element) -> Element:
        return tuple((x - y) % self.pM for x, y in zip(a, b))

    def neg(self, a: Element) -> Element:
        return tuple(-x % self.pM for x in a)

    def scale(self, a: Element, c: int) -> Element:
        return tuple(x * c % self.pM for x in a)

    def mul(self, a: Element, b: Element) -> Element:
        if self.r == 1:
            return (a[0] * b[0] % self.pM,)
        prod = [0] * (2 * self.r - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        return self.reduce(prod)

    def pow(self, a: Element, e: int) -> Element:
        if e < 0:
            return self.pow(self.inverse(a), -e)
        result, base = self.one(), a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def is_unit(self, a: Element) -> bool:
        return any(x % self.p for x in a)

    def inverse(self, a: Element) -> Element:
        if not self.is_unit(a):
            raise ZeroDivisionError("element is not a unit")
        # unit group of the residue field has order p^r - 1
        x = self.pow_residue(a, self.size - 2)
        two = self.scalar(2)
        for _ in range(self.M.bit_length() + 1):
            x = self.mul(x, self.sub(two, self.mul(a, x)))
        return x

    def pow_residue(self, a: Element, e: int) -> Element:
        result, base = self.one(), a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def is_zero_mod_p(self, a: Element) -> bool:
        return all(x % self.p == 0 for x in a)

    def with_precision(self, M: int) -> "UnramifiedRing":
        return UnramifiedRing(self.p, M, self.modulus)

    def residue_field(self) -> "UnramifiedRing":
        return self.with_precision(1)

    def lift(self, a: Element) -> Element:
        """Coordinatewise lift from the residue field (or another precision)."""
        return tuple(int(x) % self.pM for x in a)

    def mult_matrix(self, a: Element) -> list[list[int]]:
        """Matrix of multiplication by ``a``; column j is ``a * X^j``."""
        cols = []
        basis = self.one()
        X = self.reduce([0, 1]) if self.r > 1 else None
        for j in range(self.r):
            cols.append(self.mul(a, basis))
            if X is not None:
                basis = self.mul(basis, X)
        return [[cols[j][i] for j in range(self.r)] for i in range(self.r)]

    @cached_property
    def trace_vector(self) -> tuple[int, ...]:
        out = []
        basis = self.one()
        X = self.reduce([0, 1]) if self.r > 1 else None
        for _ in range(self.r):
            m = self.mult_matrix(basis)
            out.append(sum(m[i][i] for i in range(self.r)) % self.pM)
            if X is not None:
                basis = self.mul(basis, X)
        return tuple(out)

    def trace(self, a: Element) -> int:
        return sum(x * t for x, t in zip(a, self.trace_vector)) % self.pM

    def evaluate(self, poly, a: Element) -> Element:
        """Evaluate an integer polynomial (low-degree first) at ``a``."""
        acc = self.zero()
        for c in reversed(poly):
            acc = self.add(self.mul(acc, a), self.scalar(c))
        return acc

    @cached_property
    def frobenius_image(self) -> Element:
        """The root of the modulus congruent to X^p mod p."""
        if self.r == 1:
            return self.gen()
        X = self.reduce([0, 1])
        y = self.pow(X, self.p)
        deriv = [i * c for i, c in enumerate(self.modulus)][1:]
        for _ in range(self.M + 1):
            y = self.sub(y, self.mul(self.evaluate(self.modulus, y), self.inverse(self.evaluate(deriv, y))))
        assert self.evaluate(self.modulus, y) == self.zero()
        return y

    def frobenius(self, a: Element, times: int = 1) -> Element:
        for _ in range(times % self.r if self.r > 1 else 0):
            a = self.evaluate(list(a), self.frobenius_image)
        return a

    def conjugates(self, a: Element) -> list[Element]:
        out = [a]
        for _ in range(self.r - 1):
            out.append(self.frobenius(out[-1]))
        return out


def teichmuller(a: Element, ring: UnramifiedRing) -> Element:
    """The (p^r - 1)-th root of unity in ``ring`` reducing to ``a`` mod p."""
    t = ring.lift(a)
    if ring.is_zero_mod_p(t):
        raise ValueError("Teichmueller lift of 0 is not needed and not supported")
    for _ in range(ring.M + 1):
        nxt = ring.pow(t, ring.size)
        if nxt == t:
            return t
        t = nxt
    raise AssertionError("Teichmueller iteration did not converge")


def trace_to_Zp(alpha: Element, ring: UnramifiedRing) -> int:
    return ring.trace(alpha)


class FiniteField(UnramifiedRing):
    """F_{p^r} with the canonical (lexicographically smallest) modulus."""

    def __init__(self, p: int, r: int):
        super().__init__(p, 1, smallest_irreducible(p, r))

    def encode(self, a: Element) -> int:
        return sum(c * self.p**i for i, c in enumerate(a))

    def decode(self, k: int) -> Element:
        out = []
        for _ in range(self.r):
            k, c = divmod(k, self.p)
            out.append(c)
        return tuple(out)

    def elements(self):
        return (self.decode(k) for k in range(self.size))

    def order(self, a: Element) -> int:
        n = self.size - 1
        for ell in sympy.factorint(n):
            while n % ell == 0 and self.pow(a, n // ell) == self.one():
                n //= ell
        return n

    @cached_property
    def primitive_element(self) -> Element:
        for k in range(1, self.size):
            a = self.decode(k)
            if self.order(a) == self.size - 1:
                return a
        raise AssertionError("no primitive element")

    def lifted_ring(self, M: int) -> UnramifiedRing:
        return UnramifiedRing(self.p, M, self.modulus)


@dataclass
class FieldTower:
    """F_q subset F_{q^k} with q = p^b, both with canonical moduli.

    ``alpha`` is the image in F_{q^k} of the generator of F_q; any root of the
    F_q modulus serves, since exponential sums are Frobenius-invariant.
    """

    p: int
    b: int
    k: int
    base: FiniteField
    big: FiniteField
    alpha: Element
    subfield_logs: dict[Element, int]

    @property
    def r(self) -> int:
        return self.b * self.k

    @property
    def q(self) -> int:
        return self.p**self.b

    @property
    def Q(self) -> int:
        return self.big.size

    @property
    def gamma(self) -> Element:
        return self.big.primitive_element

    def embed(self, a: Element) -> Element:
        """Image in F_{q^k} of an F_q element given in the F_q power basis."""
        if self.b == 1:
            return self.big.scalar(a[0])
        return self.big.evaluate(list(a), self.alpha)

    def log(self, a: Element) -> int:
        """Discrete log base ``gamma`` of a nonzero element of the subfield."""
        return self.subfield_logs[self.embed(a)]

    def ring(self, M: int) -> UnramifiedRing:
        return self.big.lifted_ring(M)


def build_field_tower(p: int, b: int, k: int, budget: int = DEFAULT_FIELD_BUDGET) -> FieldTower:
    if not sympy.isprime(p):
        raise ValueError(f"{p} is not prime")
    if b < 1 or k < 1:
        raise ValueError("b and k must be positive")
    if p ** (b * k) > budget:
        raise ValueError(f"field size {p}^{b * k} exceeds budget {budget}")
    base = FiniteField(p, b)
    big = FiniteField(p, b * k)
    Q, q = big.size, base.size
    step = (Q - 1) // (q - 1)
    delta = big.pow(big.primitive_element, step)
    logs = {}
    x = big.one()
    for t in range(q - 1):
        logs[x] = t * step
        x = big.mul(x, delta)
    if b == 1:
        alpha = big.zero()
    else:
        alpha = next(
            y for y in sorted(logs, key=logs.get) if big.evaluate(base.modulus, y) == big.zero()
        )
    return FieldTower(p, b, k, base, big, alpha, logs)
