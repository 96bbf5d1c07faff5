"""Numeric kernels shared by the test statistics and the Monte Carlo harness.

The generalized inverse is the only piece of linear algebra the quadratic
forms need; tail probabilities are thin wrappers over :mod:`scipy.special`
so that callers never depend on scipy's distribution objects directly.
"""

import math

import numpy as np
from scipy import special

__all__ = [
    "EIGEN_RTOL",
    "NonSymmetricMatrixError",
    "generalized_inverse",
    "SpectralForm",
    "quadratic_form",
    "numerical_rank",
    "chi2_sf",
    "chi2_isf",
    "std_normal_cdf",
    "std_normal_sf",
    "rng_stream",
    "aux_stream",
]

#: Relative eigenvalue cut-off: eigenvalues below ``EIGEN_RTOL * max|eig|`` are zero.
EIGEN_RTOL = 1e-9

_SYMMETRY_RTOL = 1e-12


class NonSymmetricMatrixError(ValueError):
    """Raised when a covariance matrix handed to a quadratic form is not symmetric."""


def _check_symmetric(m):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSymmetricMatrixError(f"expected a square matrix, got shape {m.shape}")
    scale = max(np.max(np.abs(m)), 1.0) if m.size else 1.0
    if not np.allclose(m, m.T, rtol=0.0, atol=_SYMMETRY_RTOL * scale):
        raise NonSymmetricMatrixError("matrix is not symmetric")
    return 0.5 * (m + m.T)


def _eigh(m):
    w, v = np.linalg.eigh(m)
    return w, v


def _retained(w, rank, rtol):
    if rank is not None:
        if not 0 <= rank <= w.size:
            raise ValueError(f"rank must lie in [0, {w.size}], got {rank}")
        keep = np.zeros(w.size, dtype=bool)
        if rank:
            keep[np.argsort(np.abs(w))[-rank:]] = True
        return keep
    top = np.max(np.abs(w)) if w.size else 0.0
    if top == 0.0:
        return np.zeros(w.size, dtype=bool)
    return np.abs(w) >= rtol * top


def generalized_inverse(m, rank=None, rtol=EIGEN_RTOL):
    """Moore-Penrose pseudoinverse of a symmetric matrix via its spectrum.

    Parameters
    ----------
    m : array_like, shape (k, k)
        Symmetric matrix.
    rank : int, optional
        Keep exactly this many eigenpairs (largest in magnitude). When omitted,
        eigenvalues below ``rtol`` times the largest magnitude are dropped.
    rtol : float
        Relative eigenvalue tolerance used when ``rank`` is not given.

    Returns
    -------
    pinv : ndarray, shape (k, k)
    rank : int
        Number of retained eigenvalues.
    """
    m = _check_symmetric(m)
    w, v = _eigh(m)
    keep = _retained(w, rank, rtol)
    vk = v[:, keep]
    pinv = (vk / w[keep]) @ vk.T
    return 0.5 * (pinv + pinv.T), int(keep.sum())


class SpectralForm:
    """Reusable ``x -> x' m^- x`` for a fixed symmetric ``m``.

    The eigendecomposition is done once; Monte Carlo loops that keep the
    covariance fixed call the instance many times.
    """

    def __init__(self, m, rank=None, rtol=EIGEN_RTOL):
        m = _check_symmetric(m)
        w, v = _eigh(m)
        keep = _retained(w, rank, rtol)
        self.basis = np.ascontiguousarray(v[:, keep].T)
        self.eigenvalues = w[keep]
        self.rank = int(keep.sum())

    def __call__(self, x):
        proj = self.basis @ np.asarray(x, dtype=float)
        return float(np.sum(proj * proj / self.eigenvalues))


def quadratic_form(x, m, rank=None, rtol=EIGEN_RTOL):
    """Return ``(x' m^- x, rank)`` using the spectral generalized inverse of ``m``.

    Evaluated in the eigenbasis, which avoids forming the pseudoinverse.
    """
    form = SpectralForm(m, rank=rank, rtol=rtol)
    return form(x), form.rank


def numerical_rank(m, rtol=EIGEN_RTOL):
    """Count eigenvalues of symmetric ``m`` at or above ``rtol * max|eig|``."""
    w, _ = _eigh(_check_symmetric(m))
    return int(_retained(w, None, rtol).sum())


def chi2_sf(x, df):
    """Upper-tail probability of the chi-square distribution with ``df`` degrees of freedom."""
    if df < 1 or int(df) != df:
        raise ValueError(f"df must be a positive integer, got {df}")
    if x < 0:
        raise ValueError(f"chi-square statistic must be nonnegative, got {x}")
    return float(special.chdtrc(df, x))


def chi2_isf(alpha, df):
    """Critical value ``c`` with ``chi2_sf(c, df) == alpha``; infinite for ``alpha == 0``."""
    if df < 1 or int(df) != df:
        raise ValueError(f"df must be a positive integer, got {df}")
    if alpha <= 0:
        return math.inf
    return float(special.chdtri(df, alpha))


def std_normal_cdf(z):
    """Standard normal distribution function (vectorized)."""
    return special.ndtr(z)


def std_normal_sf(z):
    """Standard normal upper tail ``1 - Phi(z)`` without cancellation."""
    return special.ndtr(-np.asarray(z, dtype=float))


def rng_stream(seed, index=0):
    """Independent generator determined only by ``(seed, index)``.

    Replication ``index`` draws from the same stream no matter which worker
    runs it, so Monte Carlo results do not depend on the worker count.
    """
    if seed is None:
        raise ValueError("a seed is required for reproducible streams")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))


# Replication streams use one-element spawn keys; auxiliary ones use two.
_AUX_KEY = 2**32


def aux_stream(seed, index=0):
    """Generator for draws shared by all replications, such as fixed RL locations.

    Disjoint from every :func:`rng_stream` for the same seed.
    """
    if seed is None:
        raise ValueError("a seed is required for reproducible streams")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(_AUX_KEY, int(index)))
    return np.random.Generator(np.random.PCG64(ss))
