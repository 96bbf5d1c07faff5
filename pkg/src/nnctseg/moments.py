"""First and second moments of NNCT cell counts under random labeling.

Under random labeling the locations, and hence the NN digraph, are fixed;
only the labels are permuted. Every moment therefore depends on the graph
only through ``n``, ``Q`` and ``R``.

Write ``N_ij = sum_x 1{x in i, nn(x) in j}``. The product ``N_ij N_kl`` is a
sum over ordered pairs of NN arcs ``(x -> y, u -> v)``. Those pairs fall into
six classes by which endpoints coincide:

=====================  ===================  ==========================
shared endpoints        number of pairs      label pattern
=====================  ===================  ==========================
same arc                ``n``                ``(i, j)`` with i=k, j=l
reversed arc            ``R``                ``(i, j)`` with i=l, j=k
same target             ``Q``                ``(i, k, j)`` with j=l
target of one = source  ``n - R``            ``(i, j, l)`` with j=k
source of one = target  ``n - R``            ``(k, i, j)`` with i=l
disjoint                ``n^2-3n-Q+R``       ``(i, j, k, l)``
=====================  ===================  ==========================

and each contributes the probability that its distinct points carry the
given labels, which is a ratio of falling factorials of the class sizes.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "E_Q_OVER_N",
    "E_R_OVER_N",
    "NegativeVarianceError",
    "PairProbabilities",
    "CellMoments",
    "TMoments",
    "RlMoments",
    "pair_probabilities",
    "expected_counts",
    "t_coefficients",
    "t_transform",
    "cell_cov_matrix",
    "t_cov_matrix",
    "rl_moments",
]

#: Limits of ``E[Q/n]`` and ``E[R/n]`` for a planar homogeneous Poisson process.
E_Q_OVER_N = 0.632786
E_R_OVER_N = 0.621120


class NegativeVarianceError(ValueError):
    """A computed variance is negative; the supplied ``Q``/``R`` cannot come from any NN graph of this size."""


def _validate_sizes(class_sizes):
    sizes = np.asarray(class_sizes)
    if sizes.ndim != 1 or sizes.size < 1:
        raise ValueError("class_sizes must be a nonempty 1-d sequence")
    if not np.all(sizes == np.round(sizes)):
        raise ValueError(f"class sizes must be integers, got {class_sizes}")
    sizes = np.round(sizes).astype(np.int64)
    if np.any(sizes <= 0):
        raise ValueError(f"every class needs at least one point, got {sizes.tolist()}")
    return sizes


@dataclass(frozen=True, eq=False)
class PairProbabilities:
    """Label probabilities for 2, 3 and 4 distinct points drawn without replacement.

    ``p2[a, b]`` is the probability that two distinct random points carry labels
    ``(a, b)`` in order; ``p3`` and ``p4`` likewise for triples and quadruples.
    """

    class_sizes: np.ndarray
    n: int
    p2: np.ndarray
    p3: np.ndarray
    p4: np.ndarray

    def p_ii(self, i):
        return self.p2[i, i]

    def p_ij(self, i, j):
        return self.p2[i, j]

    def p_iii(self, i):
        return self.p3[i, i, i]

    def p_iij(self, i, j):
        return self.p3[i, i, j]

    def p_iiii(self, i):
        return self.p4[i, i, i, i]

    def p_iijj(self, i, j):
        return self.p4[i, i, j, j]


def pair_probabilities(class_sizes, n=None) -> PairProbabilities:
    """Compute ordered pair, triple and quartet label probabilities.

    Parameters
    ----------
    class_sizes : sequence of int
        Number of points in each class, all positive.
    n : int, optional
        Total count; must equal ``sum(class_sizes)`` when given.

    Notes
    -----
    Each probability is a product of ratio factors such as
    ``n_a (n_b - [a=b]) / (n (n - 1))`` so nothing overflows for large ``n``.
    """
    sizes = _validate_sizes(class_sizes)
    total = int(sizes.sum())
    if n is not None and int(n) != total:
        raise ValueError(f"n={n} does not equal the sum of class sizes {total}")
    if total < 4:
        raise ValueError(f"quartet probabilities need n >= 4, got n={total}")
    q = sizes.size
    s = sizes.astype(float)
    eye = np.eye(q)
    f1 = s / total
    # second draw: one fewer of the first label
    f2 = (s[None, :] - eye) / (total - 1)
    p2 = f1[:, None] * f2
    # third draw: subtract matches with both earlier labels
    f3 = (s[None, None, :] - eye[:, None, :] - eye[None, :, :]) / (total - 2)
    p3 = p2[:, :, None] * f3
    f4 = (s[None, None, None, :] - eye[:, None, None, :] - eye[None, :, None, :]
          - eye[None, None, :, :]) / (total - 3)
    p4 = p3[:, :, :, None] * f4
    # a negative factor only follows a zero one; clear the signed zeros
    p3 = np.where(p3 > 0, p3, 0.0)
    p4 = np.where(p4 > 0, p4, 0.0)
    return PairProbabilities(sizes, total, p2, p3, p4)


def expected_counts(class_sizes, n=None):
    """``E[N_ij]``: ``n_i (n_i - 1)/(n - 1)`` on the diagonal and ``n_i n_j/(n - 1)`` off it."""
    sizes = _validate_sizes(class_sizes)
    total = int(sizes.sum())
    if n is not None and int(n) != total:
        raise ValueError(f"n={n} does not equal the sum of class sizes {total}")
    if total < 2:
        raise ValueError("need n >= 2")
    s = sizes.astype(float)
    return s[:, None] * (s[None, :] - np.eye(sizes.size)) / (total - 1)


def t_coefficients(class_sizes):
    """Coefficients ``c_ij`` in ``T_ij = N_ij - c_ij C_j``.

    ``(n_i - 1)/(n - 1)`` when ``i == j`` and ``n_i/(n - 1)`` otherwise, which
    gives ``E[T_ij] = 0`` since ``E[C_j] = n_j``.
    """
    sizes = _validate_sizes(class_sizes)
    total = sizes.sum()
    q = sizes.size
    return (sizes[:, None] - np.eye(q)) * np.ones((1, q)) / (total - 1)


def t_transform(class_sizes):
    """Linear map ``M`` with ``vec(T) = M vec(N)``, cells in row-major order."""
    c = t_coefficients(class_sizes)
    q = c.shape[0]
    # M[(i,j), (k,l)] = [i=k][j=l] - c_ij [j=l]
    d = np.eye(q)
    m = np.einsum("ik,jl->ijkl", d, d) - np.einsum("ij,jl->ijl", c, d)[:, :, None, :]
    return m.reshape(q * q, q * q)


@dataclass(frozen=True, eq=False)
class CellMoments:
    """Mean and covariance of the vectorized NNCT (row-major) under random labeling."""

    expected: np.ndarray
    sigma_D: np.ndarray
    Q: int
    R: int
    class_sizes: np.ndarray

    @property
    def q(self):
        return self.expected.shape[0]

    @property
    def n(self):
        return int(self.class_sizes.sum())

    @property
    def variances(self):
        return np.diag(self.sigma_D).reshape(self.q, self.q)


@dataclass(frozen=True, eq=False)
class TMoments:
    """Covariances of ``T_ij = N_ij - c_ij C_j`` and of the column sums."""

    sigma_N: np.ndarray
    colsum_cov: np.ndarray
    cell_colsum_cov: np.ndarray
    coefficients: np.ndarray

    @property
    def q(self):
        return self.colsum_cov.shape[0]

    @property
    def variances(self):
        return np.diag(self.sigma_N).reshape(self.q, self.q)


@dataclass(frozen=True, eq=False)
class RlMoments:
    """Everything the four NNCT tests need for one set of class sizes and ``(Q, R)``."""

    probabilities: PairProbabilities
    cell: CellMoments
    t: TMoments

    @property
    def expected(self):
        return self.cell.expected

    @property
    def sigma_D(self):
        return self.cell.sigma_D

    @property
    def sigma_N(self):
        return self.t.sigma_N


def _validate_qr(n, Q, R):
    for name, v in (("Q", Q), ("R", R)):
        if int(v) != v or v < 0:
            raise ValueError(f"{name} must be a nonnegative integer, got {v}")
    Q, R = int(Q), int(R)
    if R % 2:
        raise ValueError(f"R counts ordered reflexive pairs and must be even, got {R}")
    if R > n:
        raise ValueError(f"R={R} exceeds n={n}")
    if Q % 2:
        raise ValueError(f"Q is a sum of d(d-1) terms and must be even, got {Q}")
    # planar in-degrees are at most 6, so Q <= 6 * 5 * n / 6
    if Q > 5 * n:
        raise ValueError(f"Q={Q} exceeds the planar bound 5n={5 * n}")
    return Q, R


def cell_cov_matrix(class_sizes, Q, R, probabilities=None) -> CellMoments:
    """Covariance matrix ``Sigma_D`` of the row-major cell counts under random labeling.

    Parameters
    ----------
    class_sizes : sequence of int
    Q, R : int
        Shared-neighbor and reflexive-pair counts of the NN graph. They may
        be supplied directly when only the table is known.

    Raises
    ------
    NegativeVarianceError
        If ``Q`` and ``R`` are inconsistent with ``n`` so that a variance
        comes out negative.
    """
    pp = probabilities if probabilities is not None else pair_probabilities(class_sizes)
    n = pp.n
    Q, R = _validate_qr(n, Q, R)
    q = pp.class_sizes.size
    d = np.eye(q)
    p2, p3, p4 = pp.p2, pp.p3, pp.p4
    # indices [i, j, k, l] for E[N_ij N_kl]
    m2 = (
        n * np.einsum("ik,jl,ij->ijkl", d, d, p2)
        + R * np.einsum("il,jk,ij->ijkl", d, d, p2)
        + Q * np.einsum("jl,ikj->ijkl", d, p3)
        + (n - R) * np.einsum("jk,ijl->ijkl", d, p3)
        + (n - R) * np.einsum("il,kij->ijkl", d, p3)
        + (n * n - 3 * n - Q + R) * p4
    )
    mean = n * p2
    cov = m2 - np.einsum("ij,kl->ijkl", mean, mean)
    sigma = cov.reshape(q * q, q * q)
    sigma = 0.5 * (sigma + sigma.T)
    var = np.diag(sigma)
    scale = max(float(np.max(np.abs(sigma))), 1.0)
    if np.any(var < -1e-9 * scale):
        bad = int(np.argmin(var))
        raise NegativeVarianceError(
            f"Var[N_{bad // q + 1}{bad % q + 1}] = {var[bad]:.6g} < 0; "
            f"Q={Q}, R={R} are inconsistent with n={n}"
        )
    return CellMoments(mean, sigma, Q, R, pp.class_sizes)


def t_cov_matrix(class_sizes, cell: CellMoments) -> TMoments:
    """Covariances of the ``T_ij`` statistics derived from ``Sigma_D``.

    ``Cov[T_ij, T_kl] = Cov[N_ij, N_kl] - c_kl Cov[N_ij, C_l] - c_ij Cov[N_kl, C_j]
    + c_ij c_kl Cov[C_j, C_l]``, i.e. ``Sigma_N = M Sigma_D M'``.
    """
    sizes = _validate_sizes(class_sizes)
    if not np.array_equal(sizes, cell.class_sizes):
        raise ValueError("class sizes do not match the cell moments")
    q = sizes.size
    cov4 = cell.sigma_D.reshape(q, q, q, q)
    cell_col = cov4.sum(axis=2)  # [i, j, l] = Cov[N_ij, C_l]
    col_col = cell_col.sum(axis=0)  # [j, l] = Cov[C_j, C_l]
    c = t_coefficients(sizes)
    m = t_transform(sizes)
    sigma_n = m @ cell.sigma_D @ m.T
    sigma_n = 0.5 * (sigma_n + sigma_n.T)
    var = np.diag(sigma_n)
    scale = max(float(np.max(np.abs(sigma_n))), 1.0)
    if np.any(var < -1e-9 * scale):
        raise NegativeVarianceError("negative Var[T_ij]; Q and R are inconsistent with n")
    return TMoments(sigma_n, 0.5 * (col_col + col_col.T), cell_col, c)


def rl_moments(class_sizes, Q, R) -> RlMoments:
    """Probabilities, ``Sigma_D`` and ``Sigma_N`` in one call."""
    pp = pair_probabilities(class_sizes)
    cell = cell_cov_matrix(pp.class_sizes, Q, R, probabilities=pp)
    return RlMoments(pp, cell, t_cov_matrix(pp.class_sizes, cell))
