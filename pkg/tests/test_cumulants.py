import math
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from finfree.appell import LaguerrePolyaData, normalized_appell
from finfree.convolve import boxplus
from finfree.cumulants import (
    TruncatedSeries,
    apply_operator_symbol,
    apply_rect_operator_symbol,
    bell,
    cumulant_flow_check,
    derivative_flow_R_identity_check,
    ff_cumulant,
    finite_R,
    log_derivative,
    log_derivative_partitions,
    mn_flow_R_identity_check,
    moment,
    partition_types,
    partitions,
    power_sums,
    rect_cumulant_K,
    rect_cumulant_scaled,
    rect_finite_R,
    to_operator_symbol,
    to_rect_operator_symbol,
)
from finfree.poly_core import MonicPoly, falling, poly_from_roots

S = sp.Symbol("s")

roots_st = st.lists(st.integers(-5, 5), min_size=1, max_size=7)
nonneg_st = st.lists(st.integers(0, 5), min_size=1, max_size=7)
index_st = st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3)])


# --------------------------------------------------------------------------
# partitions


def test_partition_counts_are_bell_numbers():
    assert [bell(j) for j in range(8)] == [1, 1, 2, 5, 15, 52, 203, 877]
    assert [p.blocks for p in partitions(1)] == [((1,),)]
    assert sum(1 for _ in partitions(3)) == 5
    assert sum(1 for _ in partitions(6)) == 203


def test_partitions_are_distinct_and_cover_the_set():
    seen = set()
    for p in partitions(5):
        flat = sorted(x for b in p.blocks for x in b)
        assert flat == [1, 2, 3, 4, 5]
        seen.add(frozenset(frozenset(b) for b in p.blocks))
    assert len(seen) == 52


def test_partition_types_count_partitions():
    for j in range(1, 9):
        assert sum(c for _, c in partition_types(j)) == bell(j)


def test_refinement_order():
    parts = list(partitions(3))
    finest = next(p for p in parts if len(p) == 3)
    coarsest = next(p for p in parts if len(p) == 1)
    assert all(finest.refines(p) and p.refines(coarsest) for p in parts)
    assert not coarsest.refines(finest)


def test_partition_order_cap():
    with pytest.raises(ValueError):
        next(partitions(15))


# --------------------------------------------------------------------------
# truncated series against sympy


def sympy_coeffs(expr, order):
    ser = sp.series(expr, S, 0, order + 1).removeO()
    return [Fraction(str(sp.nsimplify(ser.coeff(S, k)))) for k in range(order + 1)]


def test_exp_log_power_match_sympy():
    f = TruncatedSeries([1, Fraction(1, 2), -3, 0, 2, 1], 5)
    fe = 1 + S / 2 - 3 * S**2 + 2 * S**4 + S**5
    assert list(f.log().coeffs) == sympy_coeffs(sp.log(fe), 5)
    assert list(f.power(Fraction(1, 2)).coeffs) == sympy_coeffs(sp.sqrt(fe), 5)
    assert list(f.power(7).coeffs) == sympy_coeffs(fe**7, 5)
    assert list(f.reciprocal().coeffs) == sympy_coeffs(1 / fe, 5)
    g = TruncatedSeries([0, 1, Fraction(-1, 3)], 5)
    assert list(g.exp().coeffs) == sympy_coeffs(sp.exp(S - S**2 / 3), 5)
    assert f.log().exp() == f


def test_log_derivative_examples():
    ex = TruncatedSeries([Fraction(1, math.factorial(k)) for k in range(9)], 8)
    assert list(log_derivative(ex).coeffs) == [1] + [0] * 7
    one_minus = TruncatedSeries([1, -1], 8)
    assert list(log_derivative(one_minus).coeffs) == [-1] * 8


@settings(max_examples=30, deadline=None)
@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=5), min_size=1, max_size=10))
def test_log_derivative_partition_path_matches_series_path(tail):
    f = TruncatedSeries([Fraction(1)] + tail, len(tail))
    assert log_derivative_partitions(f) == log_derivative(f)


# --------------------------------------------------------------------------
# moments and cumulants


def test_moment_examples():
    assert moment(MonicPoly([1, 0, -1]), 2) == 1
    assert moment(MonicPoly([1, -2, 0]), 1) == 1
    assert moment(MonicPoly.from_roots([1, 2, 3]), 3) == 12


@settings(max_examples=30, deadline=None)
@given(roots_st)
def test_power_sums_match_roots(roots):
    p = poly_from_roots(roots)
    assert power_sums(p, 6) == [sum(Fraction(r) ** k for r in roots) for k in range(1, 7)]


def brute_force_cumulant(p, j):
    """Finite free cumulant as a literal double sum over the partition lattice.

    Weights are mu(0, sigma) on the moment side and mu(pi, 1) on the
    falling-factorial side.
    """
    d = p.degree
    m = {k: moment(p, k) for k in range(1, j + 1)}
    parts = list(partitions(j))
    total = Fraction(0)
    for sigma in parts:
        m_sigma = math.prod(m[len(b)] for b in sigma.blocks)
        mu0 = math.prod((-1) ** (len(b) - 1) * math.factorial(len(b) - 1) for b in sigma.blocks)
        for pi in parts:
            if not sigma.refines(pi):
                continue
            mu1 = (-1) ** (len(pi) - 1) * math.factorial(len(pi) - 1)
            falling_pi = math.prod(falling(d, len(V)) for V in pi.blocks)
            total += Fraction(d ** len(sigma) * mu0 * mu1) * m_sigma / falling_pi
    return total * Fraction((-d) ** (j - 1), math.factorial(j - 1))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=1, max_size=6))
def test_cumulants_match_brute_force_lattice_sum(roots):
    p = poly_from_roots(roots)
    R = finite_R(p)
    for j in range(1, min(p.degree, 5) + 1):
        k = brute_force_cumulant(p, j)
        assert ff_cumulant(p, j) == k
        assert R[j - 1] == k


def test_cumulant_examples():
    p = MonicPoly([1, 0, -2])
    assert ff_cumulant(p, 1) == moment(p, 1) == 0
    # d (m_2 - m_1^2) / (d - 1) with roots +-sqrt(2)
    assert ff_cumulant(p, 2) == finite_R(p)[1] == brute_force_cumulant(p, 2) == 4
    q = poly_from_roots([3, 3, 3, 3])
    assert [ff_cumulant(q, j) for j in range(1, 5)] == [3, 0, 0, 0]


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 7).flatmap(lambda d: st.tuples(*(st.lists(st.integers(-4, 4), min_size=d, max_size=d),) * 2)))
def test_cumulants_are_additive(ab):
    p, q = (poly_from_roots(r) for r in ab)
    r = boxplus(p, q)
    for j in range(1, p.degree + 1):
        assert ff_cumulant(r, j) == ff_cumulant(p, j) + ff_cumulant(q, j)


def brute_force_K(p, k, n):
    d = p.degree
    total = Fraction(0)
    for pi in partitions(k):
        r = len(pi)
        term = Fraction((-1) ** (r - 1) * math.factorial(r - 1))
        for V in pi.blocks:
            s = len(V)
            term *= math.factorial(s) * p.a(s) / (falling(d, s) * falling(n + d, s))
        total += term
    return total * Fraction((-1) ** k, math.factorial(k - 1))


@settings(max_examples=25, deadline=None)
@given(nonneg_st, index_st)
def test_rect_cumulants_match_brute_force_and_R(roots, n):
    p = poly_from_roots(roots)
    R = rect_finite_R(p, n)
    assert R[0] == 0
    for k in range(1, min(p.degree, 5) + 1):
        assert rect_cumulant_K(p, k, n) == brute_force_K(p, k, n)
        assert R[k] == rect_cumulant_scaled(p, k, n)


def test_rect_K_of_monomial_vanishes():
    assert rect_cumulant_K(MonicPoly([1, 0, 0, 0]), 1, 2) == 0


# --------------------------------------------------------------------------
# operator symbols


def test_symbol_of_monomial_is_one():
    assert list(to_operator_symbol(MonicPoly([1, 0, 0, 0])).coeffs) == [1, 0, 0, 0]


@settings(max_examples=30, deadline=None)
@given(roots_st, index_st)
def test_symbol_round_trips(roots, n):
    p = poly_from_roots(roots)
    d = p.degree
    for norm in (True, False):
        assert apply_operator_symbol(to_operator_symbol(p, norm), d, norm) == p
        assert apply_rect_operator_symbol(to_rect_operator_symbol(p, n, norm), d, n, norm) == p


@pytest.mark.parametrize("d", [2, 5, 9])
def test_gaussian_symbol(d):
    # p = exp(-D^2/(2d)) x^d has normalized symbol exp(-d s^2 / 2)
    h = normalized_appell(LaguerrePolyaData(0, 1, ()), d)
    gauss = TruncatedSeries([0, 0, Fraction(-d, 2)], d).exp()
    assert to_operator_symbol(h) == gauss.power(1)


# --------------------------------------------------------------------------
# R-transforms


def test_R_examples():
    assert list(finite_R(MonicPoly([1, 0, 0, 0])).coeffs) == [0, 0, 0]
    for d in (3, 4, 10):
        h = normalized_appell(LaguerrePolyaData(0, 1, ()), d)
        assert list(finite_R(h).coeffs) == [0, 1] + [0] * (d - 2)


def test_rect_R_degenerates_to_square_R():
    p = poly_from_roots([0, 1, 2, 2, 5])
    sq = finite_R(p).shift()

    def gap(n):
        return max(abs(a - b) for a, b in zip(rect_finite_R(p, n).coeffs, sq.coeffs))

    assert 0.45 < gap(2000) / gap(1000) < 0.55


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=2, max_size=10), st.data())
def test_derivative_flow_identity(roots, data):
    p = poly_from_roots(roots)
    j = data.draw(st.integers(0, p.degree - 1))
    assert derivative_flow_R_identity_check(p, j).exact


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=2, max_size=10), index_st, st.data())
def test_mn_flow_identity(roots, n, data):
    p = poly_from_roots(roots)
    j = data.draw(st.integers(0, p.degree - 1))
    assert mn_flow_R_identity_check(p, n, j).exact


def test_flow_check_with_j_zero_is_trivial():
    p = poly_from_roots([1, 2, 3])
    assert derivative_flow_R_identity_check(p, 0).max_discrepancy == 0
    assert mn_flow_R_identity_check(p, 1, 0).max_discrepancy == 0


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=2, max_size=8), index_st, st.data())
def test_cumulant_flow(roots, n, data):
    p = poly_from_roots(roots)
    j = data.draw(st.integers(0, p.degree - 1))
    k_inv, kappa, kappa_sq = cumulant_flow_check(p, n, j)
    assert k_inv.exact and kappa.exact
    if n == 0 or j == 0:
        assert kappa_sq.exact


def test_square_factor_form_differs_for_positive_index():
    p = poly_from_roots([1, 2, 4, 4])
    assert not cumulant_flow_check(p, 1, 2)[2].exact
