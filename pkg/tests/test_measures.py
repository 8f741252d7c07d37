import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finfree.appell import LaguerrePolyaData, RadonAtoms, appell_poly, hermite, levy_data, lp_series
from finfree.cumulants import TruncatedSeries, moment
from finfree.measures import (
    AtomicMeasure,
    BracketError,
    Cauchy,
    ComplexRoots,
    FreeIdAtomic,
    MarchenkoPastur,
    PoleError,
    RectGaussian,
    RectIdAtomic,
    Semicircle,
    UnsupportedCdf,
    c_transform_eval,
    cdf_table,
    dilate_measure,
    erm,
    find_roots,
    kolmogorov_distance,
    r_transform_eval,
    radon_t,
    radon_t2,
    rect_C_numeric,
    sqrt_symmetrize,
    square_pushforward,
)
from finfree.poly_core import MonicPoly, dilate, poly_from_roots

COS_200 = TruncatedSeries([Fraction((-1) ** (k // 2), math.factorial(k)) if k % 2 == 0 else 0 for k in range(201)], 200)


def quad(f, a, b, n=20000):
    # midpoint rule, adequate for the bounded integrands used below
    h = (b - a) / n
    return sum(f(a + (i + 0.5) * h) for i in range(n)) * h


# --------------------------------------------------------------------------
# roots


def test_roots_of_simple_quadratic():
    assert find_roots(MonicPoly([1, 0, -1])).floats() == [-1.0, 1.0]


def test_hermite_roots():
    expected = [-2.3344142183, -0.7419637843, 0.7419637843, 2.3344142183]
    got = find_roots(hermite(4)).floats()
    assert np.allclose(got, expected, atol=1e-10)
    assert np.allclose(got, sorted(np.roots([1, 0, -6, 0, 3]).real), atol=1e-12)


def test_wilkinson_product_roots():
    roots = [Fraction(k, 10) for k in range(1, 31)]
    rep = find_roots(poly_from_roots(roots))
    assert max(abs(r.value - float(0) - k.numerator / k.denominator) for r, k in zip(rep.roots, roots)) < 1e-30


def test_cosine_appell_roots_are_cotangent_grid():
    d = 100
    rep = find_roots(appell_poly(COS_200, d))
    import gmpy2

    with gmpy2.context(gmpy2.get_context(), precision=256):
        pi = gmpy2.const_pi()
        grid = sorted(gmpy2.cot((2 * k + 1) * pi / (2 * d)) for k in range(d))
    assert max(abs(r.value - g) for r, g in zip(rep.roots, grid)) < 1e-20


def test_aberth_agrees_with_certified():
    p = poly_from_roots([-3, -1, 0, 2, 2, 5])
    a = find_roots(p, method="aberth").floats()
    b = find_roots(p).floats()
    assert np.allclose(a, b, atol=1e-15)


def test_complex_roots_are_reported():
    with pytest.raises(ComplexRoots):
        find_roots(MonicPoly([1, 0, 1]))
    rep = find_roots(MonicPoly([1, 0, 1]), require_real=False)
    assert len(rep.complex_roots) == 2


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=2, max_size=12))
def test_moments_from_roots_match_coefficient_path(roots):
    p = poly_from_roots(roots)
    mu = erm(find_roots(p))
    for j in range(1, 7):
        assert abs(float(mu.moment(j)) - float(moment(p, j))) < 1e-12 * (1 + abs(float(moment(p, j))))


# --------------------------------------------------------------------------
# measures


def test_erm_and_merging():
    mu = erm([Fraction(1), Fraction(1), Fraction(3)])
    assert mu.atoms == ((1, Fraction(2, 3)), (3, Fraction(1, 3)))
    assert mu.total_mass == 1
    with pytest.raises(ValueError):
        erm([])
    with pytest.raises(ValueError):
        AtomicMeasure(((0, 0),))


def test_sqrt_symmetrize_examples():
    mu = erm([Fraction(0), Fraction(4)])
    assert sqrt_symmetrize(mu).atoms == ((-2, Fraction(1, 4)), (0, Fraction(1, 2)), (2, Fraction(1, 4)))
    assert sqrt_symmetrize(erm([Fraction(1)])).atoms == ((-1, Fraction(1, 2)), (1, Fraction(1, 2)))
    with pytest.raises(ValueError):
        sqrt_symmetrize(erm([Fraction(-1)]))


def test_sqrt_symmetrize_round_trip():
    mu = erm([Fraction(0), Fraction(1, 4), Fraction(9), Fraction(16)])
    assert square_pushforward(sqrt_symmetrize(mu)) == mu
    # irrational roots come back to working precision
    nu = erm([Fraction(2), Fraction(3)])
    back = square_pushforward(sqrt_symmetrize(nu))
    assert all(abs(float(x - y)) < 1e-70 for x, y in zip(back.locations, nu.locations))
    assert back.weights == nu.weights


def test_dilate_measure_commutes_with_root_finding():
    p = poly_from_roots([-2, 1, 3, 3])
    alpha = Fraction(3, 7)
    a = erm(find_roots(dilate(p, alpha)))
    b = dilate_measure(erm(find_roots(p)), alpha)
    assert a.weights == b.weights
    assert max(abs(float(x) - float(y)) for x, y in zip(a.locations, b.locations)) < 1e-40


@pytest.mark.parametrize("d", [2, 7, 30])
def test_radon_t2_of_exact_family(d):
    p = dilate(MonicPoly([1, -d] + [0] * (d - 1)), Fraction(1, d))
    rho = radon_t2(erm(find_roots(p)), d)
    assert len(rho) == 1 and float(rho.atoms[0][0]) == 1.0 and rho.total_mass == 1


def test_radon_reweightings():
    assert len(radon_t2(erm([Fraction(0), Fraction(0)]), 5)) == 0
    mu = erm([Fraction(0), Fraction(1, 2), Fraction(2)])
    assert radon_t(mu, 3).atoms == ((Fraction(1, 2), Fraction(1, 2)), (2, Fraction(2)))
    with pytest.raises(ValueError):
        radon_t(erm([Fraction(-1)]), 2)


def test_radon_t2_total_mass_identity():
    # d m_2 of the dilated Appell ERM equals gamma_1^2 - (d-1)/d gamma_2
    data = LaguerrePolyaData(Fraction(1, 2), 1, (1, -2))
    f = lp_series(data, 2)
    g1, g2 = f[1], 2 * f[2]
    for d in (4, 9):
        p = dilate(appell_poly(data, d), Fraction(1, d))
        assert d * moment(p, 2) == g1**2 - Fraction(d - 1, d) * g2


# --------------------------------------------------------------------------
# reference laws and distances


def test_ks_of_point_mass_against_cauchy():
    assert kolmogorov_distance(AtomicMeasure(((0, 1),)), Cauchy()) == 0.5


def test_ks_is_symmetric_in_shift_and_bounded():
    mu = erm([Fraction(-1), Fraction(0), Fraction(1)])
    assert 0 <= kolmogorov_distance(mu, Semicircle()) <= 1
    assert kolmogorov_distance(mu, Semicircle()) == pytest.approx(kolmogorov_distance(mu, Semicircle(0, 1)))


@pytest.mark.parametrize("x", [-1.5, -0.3, 0.0, 0.9, 1.99])
def test_semicircle_cdf_matches_density_integral(x):
    got = Semicircle().cdf(x)
    want = quad(lambda t: math.sqrt(max(4 - t * t, 0.0)) / (2 * math.pi), -2, x)
    assert abs(got - want) < 1e-6


@pytest.mark.parametrize("rate", [1.5, 2.0, 4.0])
@pytest.mark.parametrize("frac", [0.2, 0.5, 0.8])
def test_mp_cdf_matches_density_integral(rate, frac):
    law = MarchenkoPastur(rate)
    a, b = (1 - math.sqrt(rate)) ** 2, (1 + math.sqrt(rate)) ** 2
    x = a + frac * (b - a)
    assert abs(law.cdf(x) - quad(law.density, a, x)) < 1e-5
    assert law.cdf(b + 1) == 1.0


def test_mp_rate_one_cdf_at_quartiles():
    law = MarchenkoPastur(1.0)
    # F(x) for rate 1 from the arcsine-type antiderivative at x = 4
    assert law.cdf(4.0) == 1.0
    assert abs(law.cdf(1.0) - quad(law.density, 1e-12, 1.0, 200000)) < 1e-3


def test_mp_rate_below_one_is_unsupported():
    with pytest.raises(UnsupportedCdf):
        MarchenkoPastur(0.5)


def test_rect_gaussian_cdf_is_symmetric():
    law = RectGaussian(0.5)
    for x in (0.1, 0.7, 1.3):
        assert law.cdf(x) + law.cdf(-x) == pytest.approx(1.0)


def test_cdf_table_rows():
    rows = cdf_table(erm([Fraction(-1), Fraction(1)]), Cauchy())
    assert rows == [(-1.0, 0.5, 0.5, 0.25), (1.0, 0.5, 1.0, 0.75)]


# --------------------------------------------------------------------------
# transforms


def test_free_id_semicircle_transform():
    law = FreeIdAtomic(0, 1, AtomicMeasure(()))
    assert r_transform_eval(law, Fraction(1, 3)) == Fraction(1, 3)
    assert law.cdf(0.0) == 0.5


def test_free_id_single_atom_matches_log_derivative():
    # f = (1 - z) e^z has -f'/f = z / (1 - z)
    ld = levy_data(LaguerrePolyaData(0, 0, (1,)))
    law = FreeIdAtomic(ld.gamma, ld.sigma2, AtomicMeasure(ld.nu.atoms))
    for z in (Fraction(-1, 2), Fraction(1, 5), Fraction(1, 3)):
        assert r_transform_eval(law, z) == z / (1 - z)
    with pytest.raises(PoleError):
        r_transform_eval(law, 1)


def test_free_id_two_atoms_has_no_cdf():
    law = FreeIdAtomic(0, 0, AtomicMeasure(((1, 1), (2, 1))))
    with pytest.raises(UnsupportedCdf):
        law.cdf(0.0)


def test_rect_id_transform():
    law = RectIdAtomic(1, RadonAtoms(((Fraction(0), Fraction(3)),)))
    assert c_transform_eval(law, Fraction(-1, 7)) == Fraction(-3, 7)
    assert law.cdf(0.0) == pytest.approx(0.5)
    with pytest.raises(UnsupportedCdf):
        RectIdAtomic(1, RadonAtoms(((Fraction(1), Fraction(1)),))).cdf(0.0)


def test_rect_C_numeric_of_point_mass_is_zero():
    # float evaluation, so zero up to rounding
    for z in (-0.01, -0.05):
        assert abs(rect_C_numeric(AtomicMeasure(((0, 1),)), 1, z)) < 1e-14


def test_rect_C_numeric_small_lambda_expansion():
    # C(z) ~ U(z/H^{-1}(z) - 1) with H close to z (M + 1) for lam -> 0
    mu = AtomicMeasure(((-1, Fraction(1, 2)), (1, Fraction(1, 2))))
    small = rect_C_numeric(mu, 1e-6, -0.01)
    # lam = 0: H(w) = w/(1-w), H^{-1}(z) = z/(1+z), U(y) = y
    assert abs(small - (-0.01)) < 1e-5


def test_rect_C_numeric_rejects_positive_z():
    with pytest.raises(BracketError):
        rect_C_numeric(AtomicMeasure(((0, 1),)), 1, 0.1)
