from fractions import Fraction

import numpy as np
import pytest

from finfree.convolve import boxplus
from finfree.matrix_oracle import (
    charpoly_exact,
    haar_batch,
    haar_orthogonal,
    mc_boxplus,
    mc_compression,
    mc_rect_boxplus,
    mc_rect_compression,
)
from finfree.poly_core import MonicPoly, poly_from_roots


def test_charpoly_exact_matches_numpy():
    rng = np.random.default_rng(3)
    M = rng.integers(-4, 5, size=(6, 6)).astype(float)
    p = charpoly_exact(M)
    assert np.allclose([float(c) for c in p.coeffs], np.poly(M), atol=1e-8)
    assert charpoly_exact(np.diag([1.0, 2.0, 3.0])) == poly_from_roots([1, 2, 3])
    assert charpoly_exact(np.array([[0.5]])) == MonicPoly([1, Fraction(-1, 2)])


def test_haar_dimension_one_is_a_fair_sign():
    rng = np.random.default_rng(0)
    signs = haar_batch(20000, 1, rng)[:, 0, 0]
    assert set(np.unique(signs)) == {-1.0, 1.0}
    assert abs(signs.mean()) < 4 / np.sqrt(20000)


def test_haar_orthogonality_and_isotropy():
    rng = np.random.default_rng(1)
    O = haar_orthogonal(7, rng)
    assert np.abs(O.T @ O - np.eye(7)).max() < 1e-12
    cols = haar_batch(100_000, 3, rng)[:, :, 0]
    se = cols.std(axis=0) / np.sqrt(len(cols))
    assert np.all(np.abs(cols.mean(axis=0)) < 4 * se)


def test_zero_variance_cases_are_exact():
    A = np.diag([1.0, -2.0, 3.0])
    rep = mc_boxplus(A, np.zeros((3, 3)), samples=2000, seed=5)
    assert rep.zero_variance
    assert rep.mean == [float(c) for c in charpoly_exact(A).coeffs[1:]]
    rep = mc_compression(np.zeros((4, 4)), 2, samples=2000, seed=5)
    assert rep.zero_variance and rep.mean == [0.0, 0.0]
    Ar = np.array([[1.0, 0.0, 2.0], [0.0, -1.0, 1.0]])
    rep = mc_rect_boxplus(Ar, np.zeros((2, 3)), 1, samples=2000, seed=5)
    assert rep.zero_variance


def test_scalar_shift_is_deterministic_up_to_rounding():
    # O^T B O + aI has a fixed spectrum; eigensolver rounding leaves a tiny spread
    B = np.diag([0.0, 1.0, 4.0])
    rep = mc_boxplus(2 * np.eye(3), B, samples=2000, seed=7)
    target = [float(c) for c in poly_from_roots([2, 3, 6]).coeffs[1:]]
    assert np.allclose(rep.mean, target, atol=1e-10)
    assert max(rep.variance) < 1e-20
    assert rep.max_abs_z < 4


def test_projection_example():
    # d=2, ell=1 on diag(0, 1): E det(x - O A O^T) = x - 1/2
    rep = mc_compression(np.diag([0.0, 1.0]), 1, samples=40_000, seed=2)
    assert rep.target == [-0.5]
    assert abs(rep.z_score[0]) < 4


def test_boxplus_example_within_four_standard_errors():
    A, B = np.diag([1.0, 2.0, 3.0, 4.0]), np.diag([0.0, 0.0, 1.0, 1.0])
    rep = mc_boxplus(A, B, samples=100_000, seed=42)
    assert rep.target == [float(c) for c in boxplus(charpoly_exact(A), charpoly_exact(B)).coeffs[1:]]
    assert rep.max_abs_z <= 4


def test_rect_checks_within_four_standard_errors():
    rng = np.random.default_rng(11)
    A = rng.integers(-2, 3, size=(3, 5)).astype(float)
    B = rng.integers(-2, 3, size=(3, 5)).astype(float)
    assert mc_rect_compression(A, 2, 2, samples=50_000, seed=3).max_abs_z <= 4
    assert mc_rect_boxplus(A, B, 2, samples=50_000, seed=3).max_abs_z <= 4


def test_standard_error_halves_with_four_times_the_samples():
    A = np.diag([-1.0, 0.0, 2.0, 5.0])
    small = mc_compression(A, 2, samples=20_000, seed=9)
    large = mc_compression(A, 2, samples=80_000, seed=9)
    for s, l in zip(small.standard_error, large.standard_error):
        assert 0.4 < l / s < 0.6


def test_reports_are_deterministic():
    A = np.diag([1.0, 2.0, 3.0])
    a = mc_compression(A, 2, samples=15_000, seed=4).to_json()
    b = mc_compression(A, 2, samples=15_000, seed=4).to_json()
    assert a == b


def test_shape_validation():
    with pytest.raises(ValueError):
        mc_boxplus(np.array([[0.0, 1.0], [2.0, 0.0]]), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        mc_compression(np.eye(3), 3)
    with pytest.raises(ValueError):
        mc_rect_compression(np.zeros((2, 2)), 1, 1)
