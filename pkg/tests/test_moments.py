from dataclasses import replace

import numpy as np
import pytest

from nnctseg import (NegativeVarianceError, build_nn_graph, cell_cov_matrix, expected_counts,
                     pair_probabilities, rl_moments, t_cov_matrix)
from nnctseg.moments import E_Q_OVER_N, E_R_OVER_N, t_coefficients, t_transform

from conftest import random_pattern

PIELOU = (160, 68)


def test_pair_probability_small():
    p = pair_probabilities((2, 2))
    assert p.p_ii(0) == pytest.approx(1 / 6, abs=1e-15)
    assert p.p_iij(0, 1) == pytest.approx(2 * 1 * 2 / (4 * 3 * 2))
    assert p.p_iijj(0, 1) == pytest.approx(2 * 1 * 2 * 1 / (4 * 3 * 2 * 1))


def test_pair_probability_pielou():
    p = pair_probabilities(PIELOU)
    assert p.p_ii(0) == pytest.approx(25440 / 51756, abs=1e-15)
    assert p.p_ii(0) == pytest.approx(0.491537, abs=5e-7)


def test_pair_probability_symmetry_and_range():
    p = pair_probabilities((3, 7, 11))
    np.testing.assert_allclose(p.p2, p.p2.T)
    for arr in (p.p2, p.p3, p.p4):
        assert np.all((arr >= 0) & (arr <= 1))
        assert arr.sum() == pytest.approx(1.0)


def test_pair_probability_errors():
    with pytest.raises(ValueError):
        pair_probabilities((1, 2))
    with pytest.raises(ValueError):
        pair_probabilities((3, 0, 2))


def test_pair_probability_large_n_no_overflow():
    p = pair_probabilities((60000, 40000))
    assert np.isfinite(p.p4).all()
    assert p.p_iiii(0) == pytest.approx(0.6**4, rel=1e-3)


def test_expected_counts_pielou():
    e = expected_counts(PIELOU)
    assert e[0, 0] == pytest.approx(112.07, abs=0.005)
    assert e[1, 1] == pytest.approx(20.07, abs=0.005)
    np.testing.assert_allclose(e.sum(axis=0), PIELOU)
    np.testing.assert_allclose(e.sum(axis=1), PIELOU)


def test_expected_counts_equal_sizes():
    m = 9
    assert expected_counts((m, m))[0, 1] == pytest.approx(m * m / (2 * m - 1))


def test_pielou_variance():
    cell = cell_cov_matrix(PIELOU, 162, 134)
    assert cell.variances[0, 0] == pytest.approx(32.6787, abs=5e-4)
    assert cell.variances[0, 0] == pytest.approx(32.7, abs=0.05)


def test_cov_symmetry_and_row_constraints(rng):
    for sizes in [(10, 12), (10, 11, 13), (10, 12, 14, 10, 11)]:
        p = random_pattern(rng, sizes)
        g = build_nn_graph(p)
        m = rl_moments(sizes, g.Q, g.R)
        q = len(sizes)
        sd, sn = m.sigma_D, m.sigma_N
        np.testing.assert_allclose(sd, sd.T, atol=1e-12)
        np.testing.assert_allclose(sn, sn.T, atol=1e-12)
        assert np.all(np.diag(sd) >= 0) and np.all(np.diag(sn) >= 0)
        scale = np.abs(sd).max()
        # each NNCT row sums to a constant
        rowsum = sd.reshape(q, q, q * q).sum(axis=1)
        np.testing.assert_allclose(rowsum, 0, atol=1e-10 * scale)
        # column sums add up to n
        np.testing.assert_allclose(m.t.colsum_cov.sum(axis=0), 0, atol=1e-10 * scale)
        # T has zero mean
        t_mean = m.expected - t_coefficients(sizes) * m.expected.sum(axis=0)[None, :]
        np.testing.assert_allclose(t_mean, 0, atol=1e-12 * m.expected.max())


def test_t_transform_matches_definition():
    sizes = (4, 5, 6)
    q = 3
    c = t_coefficients(sizes)
    assert c[0, 0] == pytest.approx(3 / 14) and c[0, 1] == pytest.approx(4 / 14)
    m = t_transform(sizes)
    x = np.arange(9.0)
    counts = x.reshape(q, q)
    expected = counts - c * counts.sum(axis=0)[None, :]
    np.testing.assert_allclose(m @ x, expected.ravel())


def test_two_class_t_antisymmetry():
    cell = cell_cov_matrix((30, 40), 40, 44)
    tm = t_cov_matrix((30, 40), cell)
    v = tm.variances
    assert v[0, 0] == pytest.approx(v[1, 0])
    assert v[0, 1] == pytest.approx(v[1, 1])
    # T_11 = -T_21, so their covariance is minus the variance
    assert tm.sigma_N[0, 2] == pytest.approx(-v[0, 0])


def test_invalid_qr():
    for q_, r_ in [(-2, 2), (2, 3), (3, 2), (0, 300)]:
        with pytest.raises(ValueError):
            cell_cov_matrix((100, 100), q_, r_)


def test_planar_q_bound():
    cell_cov_matrix((5, 5), 50, 0)
    with pytest.raises(ValueError):
        cell_cov_matrix((5, 5), 52, 0)


def test_negative_variance_is_an_error():
    pp = pair_probabilities((5, 5))
    bad = replace(pp, p2=pp.p2 * 3.0)
    with pytest.raises(NegativeVarianceError):
        cell_cov_matrix((5, 5), 4, 4, probabilities=bad)


def test_poisson_constants_documented():
    assert E_Q_OVER_N == 0.632786
    assert E_R_OVER_N == 0.621120
