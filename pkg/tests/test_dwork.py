import math

import pytest

from tadicnp.dwork import (
    TruncationError,
    build_psi_matrix,
    char_series,
    chain_bound,
    coefficient_ring,
    expand_Ef,
    np_from_cbm,
    stabilize_truncation,
    to_T_series,
    verify_entry_bounds,
)
from tadicnp.ledger import compute_ledger
from tadicnp.linalg import berkowitz
from tadicnp.polygons import NewtonPointSet
from tadicnp.polytope import build_cone_data, make_polytope
from tadicnp.sums import LaurentData, c_function
from tadicnp.tseries import RamifiedSeries, SPolynomial, artin_hasse

INTERVAL1 = build_cone_data(make_polytope([(0,), (1,)]))
INTERVAL2 = build_cone_data(make_polytope([(0,), (2,)]))
INTERVAL3 = build_cone_data(make_polytope([(0,), (3,)]))
SIMPLEX = build_cone_data(make_polytope([(0, 0), (1, 0), (0, 1)]))

F_X = LaurentData.from_mapping(1, 1, {(1,): (1,)})
F11 = LaurentData.from_mapping(1, 1, {(3,): (1,), (1,): (1,)})
F5_PLANE = LaurentData.from_mapping(2, 1, {(0, 0): (1,), (1, 0): (1,), (0, 1): (2,)})
F9 = LaurentData.from_mapping(1, 2, {(2,): (0, 1), (1,): (1, 0)})


def pi_series(ring, coeffs, length):
    return RamifiedSeries.from_coefficients(ring, 1, [ring.scalar(c) for c in coeffs], length)


def test_single_term_expansion():
    p, M, N = 5, 3, 7
    ring = coefficient_ring(p, 1, M)
    lam = artin_hasse(p, M, N).coeffs
    exp = expand_Ef(F_X, ring, N)
    for w in range(N):
        assert exp.coeffs[(w,)] == pi_series(ring, [0] * w + [lam[w]] + [0] * (N - w - 1), N)


def test_x3_plus_x_expansion():
    ring = coefficient_ring(11, 1, 2)
    exp = expand_Ef(F11, ring, 6)
    assert exp.coeffs[(0,)] == RamifiedSeries.constant(ring, 1, 6, ring.one())
    assert exp.coeffs[(1,)] == pi_series(ring, [0, 1, 0, 0, 0, 0], 6)


@pytest.mark.parametrize("f,cone,b", [(F11, INTERVAL3, 1), (F5_PLANE, SIMPLEX, 1), (F9, INTERVAL2, 2)])
def test_expansion_order_bound(f, cone, b):
    p = 11 if f is F11 else 5 if f is F5_PLANE else 3
    ring = coefficient_ring(p, b, 2)
    for w, s in expand_Ef(f, ring, 8).coeffs.items():
        o = s.ord()
        assert o is None or o >= math.ceil(cone.degree(w))


def test_entries_for_f_equals_x():
    p, M, N = 3, 2, 6
    ring = coefficient_ring(p, 1, M)
    lam = artin_hasse(p, M, 20).coeffs
    basis = INTERVAL1.lattice_points(3)
    mat = build_psi_matrix(F_X, INTERVAL1, basis, p, 1, M, N)
    for i, u in enumerate(basis):
        for j, w in enumerate(basis):
            (uu,), (ww,) = u.coords, w.coords
            e = p * uu - ww
            if e < 0:
                assert mat.entries[i][j].is_zero()
                continue
            shift = (p - 1) * uu
            expected = [0] * N
            if shift < N:
                expected[shift] = lam[e]
            assert mat.entries[i][j] == pi_series(ring, expected, N), (uu, ww)


def test_berkowitz_small_cases():
    assert berkowitz([[7]], 1, 0) == [1, -7]
    assert berkowitz([[2, 0], [0, 3]], 1, 0) == [1, -5, 6]
    assert berkowitz([[1, 2], [3, 4]], 1, 0, max_degree=1) == [1, -5]


def test_char_series_trace_for_f_equals_x():
    """Coefficient of s is minus the trace: sum_u lambda_{(p-1)u} pi^{(p-1)u}."""
    p, M, N = 3, 2, 8
    ring = coefficient_ring(p, 1, M)
    lam = artin_hasse(p, M, 20).coeffs
    basis = INTERVAL1.lattice_points(3)
    mat = build_psi_matrix(F_X, INTERVAL1, basis, p, 1, M, N)
    c1 = char_series(mat, 1)[1]
    expected = [0] * N
    for u in range(4):
        if (p - 1) * u < N:
            expected[(p - 1) * u] -= lam[(p - 1) * u]
    assert c1 == pi_series(ring, expected, N)


def test_entry_bounds_hold_and_detect_tampering():
    basis = INTERVAL3.lattice_points(2)
    mat = build_psi_matrix(F11, INTERVAL3, basis, 11, 1, 2, 12)
    rep = verify_entry_bounds(mat, INTERVAL3, F11)
    assert rep.ok and rep.checked > 0
    key = next(k for k, v in mat.raw.items() if v.ord() and v.ord() > 0)
    ring = mat.ring
    mat.raw[key] = mat.raw[key] + RamifiedSeries.constant(ring, 1, mat.raw[key].length, ring.one())
    assert not verify_entry_bounds(mat, INTERVAL3).ok


def test_chain_bound_matches_direct_ceiling_for_b1():
    for u in range(4):
        for w in range(4):
            d = INTERVAL3.degree((11 * u - w,))
            expected = math.inf if d == math.inf else math.ceil(d)
            assert chain_bound(INTERVAL3, (u,), (w,), 11, 1) == expected


def test_np_from_cbm_reindex():
    pts = NewtonPointSet([(0, 0), (2, 3), (4, 8)])
    assert np_from_cbm(pts, 2).points == ((0, 0), (1, 3), (2, 8))
    assert np_from_cbm(pts, 1) == pts


def test_stabilize_trivial():
    st = stabilize_truncation(F_X, INTERVAL1, 3, 1, 2, 6, 0)
    assert st.series.K == 0 and st.series[0].coeffs == (1, 0, 0, 0, 0, 0)


def test_stabilization_for_f_equals_x():
    st = stabilize_truncation(F_X, INTERVAL1, 3, 1, 2, 6, 4)
    # rows with (p - 1) deg u >= N vanish, so deg 2 already suffices for N = 6
    assert st.deg_bound == 2
    assert st.history[-1][2] is True


@pytest.mark.parametrize(
    "f,cone,p,b,M,N,K",
    [
        (F_X, INTERVAL1, 3, 1, 2, 6, 4),
        (F11, INTERVAL3, 11, 1, 2, 12, 6),
        (F5_PLANE, SIMPLEX, 5, 1, 2, 6, 3),
        (F9, INTERVAL2, 3, 2, 2, 6, 3),
    ],
)
def test_cross_engine(f, cone, p, b, M, N, K):
    led = compute_ledger(p, b, f.n, cone.D, M, N, K)
    direct = c_function(f, led, with_L=False).C
    st = stabilize_truncation(f, cone, p, b, M, N, K)
    assert st.series == direct


def test_galois_check_rejects_non_rational_coefficient():
    ring = coefficient_ring(3, 2, 2)
    one = RamifiedSeries.constant(ring, 1, 4, ring.one())
    bad = RamifiedSeries.constant(ring, 1, 4, ring.gen())
    with pytest.raises(TruncationError, match="truncation too small or bug"):
        to_T_series([one, bad], 3, 2, 4)


def test_ramified_exponent_check():
    ring = coefficient_ring(3, 1, 2)
    s = RamifiedSeries(ring, 2, ((0, 1, 0, 0),))
    with pytest.raises(TruncationError):
        to_T_series([RamifiedSeries.constant(ring, 2, 4, ring.one()), s], 3, 2, 2)


def test_to_T_series_identity():
    ring = coefficient_ring(5, 1, 2)
    one = RamifiedSeries.constant(ring, 1, 4, ring.one())
    out = to_T_series([one], 5, 2, 4)
    assert isinstance(out, SPolynomial) and out[0].coeffs == (1, 0, 0, 0)
