import numpy as np
import pytest
from scipy import stats

from nnctseg.numerics import (NonSymmetricMatrixError, aux_stream, chi2_isf, chi2_sf,
                              generalized_inverse, numerical_rank, quadratic_form, rng_stream,
                              std_normal_cdf, std_normal_sf)


def test_identity_pinv():
    pinv, rank = generalized_inverse(np.eye(4))
    assert np.array_equal(pinv, np.eye(4)) and rank == 4


def test_zero_eigenvalue():
    pinv, rank = generalized_inverse(np.diag([2.0, 0.0]))
    np.testing.assert_allclose(pinv, np.diag([0.5, 0.0]))
    assert rank == 1


def test_nonsymmetric_rejected():
    with pytest.raises(NonSymmetricMatrixError):
        generalized_inverse(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_penrose_and_idempotence(rng):
    for k in range(2, 9):
        a = rng.normal(size=(k, k - 1))
        m = a @ a.T
        pinv, rank = generalized_inverse(m)
        assert rank == k - 1
        np.testing.assert_allclose(m @ pinv @ m, m, rtol=1e-8, atol=1e-8 * np.abs(m).max())
        full = m + np.eye(k)
        back, _ = generalized_inverse(generalized_inverse(full)[0])
        np.testing.assert_allclose(back, full, rtol=1e-8)


def test_forced_rank_and_quadratic_form():
    m = np.diag([4.0, 1.0, 1e-3])
    x = np.array([2.0, 1.0, 1.0])
    assert quadratic_form(x, m) == pytest.approx((1 + 1 + 1000, 3))
    val, rank = quadratic_form(x, m, rank=2)
    assert rank == 2 and val == pytest.approx(2.0)
    assert numerical_rank(m) == 3
    assert numerical_rank(np.diag([1.0, 1e-10])) == 1


def test_chi2_values():
    assert chi2_sf(19.67, 2) == pytest.approx(5.4e-5, rel=0.01)
    assert chi2_sf(13.11, 1) == pytest.approx(2.9e-4, rel=0.03)
    for k in (1, 2, 5, 64):
        assert chi2_sf(0.0, k) == 1.0
        assert chi2_sf(k + 1.5, k) == pytest.approx(stats.chi2.sf(k + 1.5, k), abs=1e-10)
    with pytest.raises(ValueError):
        chi2_sf(1.0, 0)


def test_chi2_monotone():
    xs = np.linspace(0.1, 30, 50)
    assert np.all(np.diff([chi2_sf(x, 3) for x in xs]) < 0)
    assert np.all(np.diff([chi2_sf(4.0, k) for k in range(1, 10)]) > 0)


def test_chi2_isf():
    assert chi2_isf(0.05, 1) == pytest.approx(3.841459, abs=1e-6)
    assert chi2_isf(0.0, 3) == np.inf


def test_normal():
    assert std_normal_cdf(0.0) == 0.5
    assert 2 * std_normal_sf(2.29) == pytest.approx(0.0220, abs=5e-5)
    z = np.linspace(-6, 6, 25)
    np.testing.assert_allclose(std_normal_cdf(-z), 1 - std_normal_cdf(z), atol=1e-12)


def test_rng_streams():
    a = rng_stream(7, 3).random(5)
    assert np.array_equal(a, rng_stream(7, 3).random(5))
    assert not np.array_equal(a, rng_stream(7, 4).random(5))
    assert not np.array_equal(a, rng_stream(8, 3).random(5))
    assert not np.array_equal(aux_stream(7, 3).random(5), a)
