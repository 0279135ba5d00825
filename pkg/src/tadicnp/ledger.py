"""Top-down precision requirements for one instance."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .padic import vp_factorial

DEFAULT_POINT_BUDGET = 2 * 10**7


class BudgetError(ValueError):
    pass


@dataclass(frozen=True)
class PrecisionLedger:
    p: int
    b: int
    n: int
    D: int
    M_target: int
    N: int
    K: int
    Mw: int
    M_c: int
    rho_length: int
    point_count: int

    @property
    def q(self) -> int:
        return self.p**self.b

    def as_dict(self) -> dict:
        return asdict(self)


def compute_ledger(
    p: int,
    b: int,
    n: int,
    D: int,
    M_target: int,
    N: int,
    K: int,
    point_budget: int = DEFAULT_POINT_BUDGET,
) -> PrecisionLedger:
    """Paddings: exp/division loss ``v_p(K!) + floor(K/(p-1))`` on top of the
    target, then ``v_p((N-1)!)`` more for the binomial coefficients."""
    if min(M_target, N, K) < 1:
        raise ValueError("M_target, N and K must be positive")
    Mw = M_target + vp_factorial(K, p) + K // (p - 1)
    M_c = Mw + vp_factorial(N - 1, p)
    q = p**b
    points = sum((q**k - 1) ** n for k in range(1, K + 1))
    if points > point_budget:
        raise BudgetError(
            f"point budget exceeded: sum_(k<=K) (q^k-1)^n = {points} > {point_budget} (binding: K={K}, q={q}, n={n})"
        )
    return PrecisionLedger(p, b, n, D, M_target, N, K, Mw, M_c, N * D, points)
