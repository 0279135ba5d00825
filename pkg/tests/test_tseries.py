from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tadicnp.padic import vp_factorial
from tadicnp.tseries import (
    PrecisionError,
    SPolynomial,
    TruncatedSeries,
    artin_hasse,
    artin_hasse_rational,
    binomial_power,
    convolve,
    exp_divided_sum,
    pi_from_T,
)

import oracles


def ts(p, M, coeffs):
    return TruncatedSeries(p, M, tuple(coeffs))


def test_artin_hasse_small_coefficients():
    lam = artin_hasse_rational(2, 5)
    assert lam[:4] == [1, 1, 1, Fraction(2, 3)]
    lam3 = artin_hasse_rational(3, 4)
    assert lam3[:4] == [1, 1, Fraction(1, 2), Fraction(1, 2)]


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_artin_hasse_is_p_integral(p):
    for c in artin_hasse_rational(p, 30):
        assert c.denominator % p != 0


def test_pi_for_p2():
    assert pi_from_T(2, 4, 3).coeffs == (0, 1, 15)


@pytest.mark.parametrize("p", [2, 3, 5, 11])
def test_pi_inverts_artin_hasse(p):
    M, N = 4, 10
    E = artin_hasse(p, M, N)
    pi = pi_from_T(p, M, N)
    one_plus_T = ts(p, M, [1, 1] + [0] * (N - 2))
    assert E.compose(pi) == one_plus_T


def test_binomial_power_examples():
    assert binomial_power(4, 5, 3, 2, 6).coeffs == (1, 4, 6, 4, 1, 0)
    assert binomial_power(0, 5, 3, 2, 4).coeffs == (1, 0, 0, 0)
    minus_one = binomial_power(-1, 3, 3, 2, 5)
    assert minus_one.coeffs == tuple(x % 9 for x in (1, -1, 1, -1, 1))


def test_binomial_power_precision_guard():
    with pytest.raises(PrecisionError, match="need M_c >= 3"):
        binomial_power(5, 2, 3, 2, 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(-500, 500), st.integers(-500, 500), st.sampled_from([2, 3, 5]))
def test_binomial_group_law(a, b, p):
    M, N = 3, 7
    Mc = M + 8
    prod = binomial_power(a, Mc, p, M, N) * binomial_power(b, Mc, p, M, N)
    assert prod == binomial_power(a + b, Mc, p, M, N)
    assert binomial_power(a, Mc, p, M, N).coeffs == tuple(oracles.binomial_series(a, p, M, N))


def test_exp_examples():
    # exp(s + s^2/2) = 1 + s + s^2 + ...
    b = [ts(2, 4, [1, 0]), ts(2, 4, [1, 0])]
    C = exp_divided_sum(b, [1, 1], 3)
    assert C[1].coeffs == (1, 0)
    assert C[2].coeffs == (1, 0)


def test_exp_three_halves():
    # c_2 = (b_1^2 + b_2)/2 = 3/2 for b_1 = 1, b_2 = 2
    b = [ts(5, 3, [1, 0]), ts(5, 3, [2, 0])]
    C = exp_divided_sum(b, [1, 1], 3)
    assert C[2].coeffs[0] == 3 * pow(2, -1, 125) % 125


def test_exp_integrality_failure():
    b = [ts(2, 4, [1, 0]), ts(2, 4, [0, 0])]
    with pytest.raises(ArithmeticError, match="non-integral"):
        exp_divided_sum(b, [1, 1], 3)


def test_exp_precision_requirement():
    b = [ts(3, 2, [1])] * 3
    with pytest.raises(PrecisionError):
        exp_divided_sum(b, [1, 1, 1], 2)


def _power_sum_weights(alphas, K, N):
    """b_k(T) = sum_i alpha_i(T)^k for linear alpha_i = a + c T; exp(sum b_k s^k/k)
    is prod (1 - alpha_i s)^(-1), so every coefficient is integral."""
    out = []
    for k in range(1, K + 1):
        total = [Fraction(0)] * N
        for a, c in alphas:
            power = [Fraction(1)] + [Fraction(0)] * (N - 1)
            for _ in range(k):
                power = [power[j] * a + (power[j - 1] * c if j else 0) for j in range(N)]
            total = [x + y for x, y in zip(total, power)]
        out.append(total)
    return out


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(-20, 20)), min_size=1, max_size=3), st.sampled_from([2, 3, 5]))
def test_exp_matches_rational_oracle(alphas, p):
    K, N, M = 4, 3, 2
    Mw = M + vp_factorial(K, p)
    weights = _power_sum_weights(alphas, K, N)
    b = [ts(p, Mw, [int(x) for x in w]) for w in weights]
    C = exp_divided_sum(b, [1] * K, M)
    ref = oracles.exp_series_rational(weights, K, N)
    for i in range(K + 1):
        assert C[i].coeffs == tuple(oracles.reduce_rational(x, p, M) for x in ref[i])


def test_padding_invariance():
    """Raising the working precision does not change the reduced result."""
    weights = _power_sum_weights([(2, 1), (-1, 3)], 3, 3)
    b_lo = [ts(3, 3, [int(x) for x in w]) for w in weights]
    b_hi = [ts(3, 6, [int(x) for x in w]) for w in weights]
    assert exp_divided_sum(b_lo, [1, 1, 1], 2) == exp_divided_sum(b_hi, [1, 1, 1], 2)


def test_ord_T():
    assert ts(3, 2, [0, 0, 9, 3]).ord_T() == 3
    assert ts(3, 2, [0, 0, 0]).ord_T() is None
    assert ts(3, 2, [1]).ord_T() == 0


def test_json_round_trip():
    s = ts(11, 3, [1, 2, 1330])
    assert TruncatedSeries.from_json(s.to_json()) == s


def test_metadata_mismatch():
    with pytest.raises(ValueError):
        ts(3, 2, [1, 0]) + ts(3, 3, [1, 0])
    with pytest.raises(ValueError):
        ts(3, 2, [1, 0]) * ts(5, 2, [1, 0])


def test_compose_round_trip():
    p, M, N = 3, 3, 8
    pi = pi_from_T(p, M, N)
    E = artin_hasse(p, M, N)
    T_series = ts(p, M, [0, 1] + [0] * (N - 2))
    # E(pi(T)) - 1 = T
    assert E.compose(pi) - ts(p, M, [1] + [0] * (N - 1)) == T_series


series_st = st.lists(st.integers(0, 10**4), min_size=5, max_size=5)


@settings(max_examples=60, deadline=None)
@given(series_st, series_st, series_st)
def test_series_ring_axioms(a, b, c):
    A, B, C = ts(5, 3, a), ts(5, 3, b), ts(5, 3, c)
    assert A * B == B * A
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C
    assert A - A == TruncatedSeries.zero(5, 3, 5)
    if a[0] % 5:
        assert A * A.inverse() == TruncatedSeries.one(5, 3, 5)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 10**9), min_size=1, max_size=40), st.lists(st.integers(0, 10**9), min_size=1, max_size=40))
def test_convolve_matches_schoolbook(a, b):
    mod = 7**9
    length = 30
    ref = [0] * length
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            if i + j < length:
                ref[i + j] += x * y
    assert convolve(a, b, length, mod) == [x % mod for x in ref]


def test_spolynomial_inverse_and_power():
    one = ts(3, 2, [1, 0])
    x = SPolynomial((one, ts(3, 2, [2, 1]), ts(3, 2, [0, 3])))
    assert x * x.inverse() == SPolynomial((one, ts(3, 2, [0, 0]), ts(3, 2, [0, 0])))
    assert x.power(3) == x * x * x
    assert x.power(-2) * x.power(2) == x.power(0)
