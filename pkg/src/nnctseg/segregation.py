"""Cell-specific and overall NNCT tests of segregation.

Two families are provided. Dixon's tests standardize the raw cell counts
``N_ij``. The newer tests standardize ``T_ij = N_ij - c_ij C_j``, which
removes the column-sum dependence so each cell has mean zero with a
variance that accounts for the random ``C_j``.
"""

from dataclasses import dataclass, field

import numpy as np

from .moments import CellMoments, RlMoments, TMoments, rl_moments
from .numerics import EIGEN_RTOL, chi2_sf, quadratic_form, std_normal_sf
from .table import PIELOU_CAVEAT, Nnct, pielou_chisq

__all__ = [
    "DIXON",
    "NEW",
    "CellTests",
    "OverallTest",
    "TestReport",
    "dixon_cell_tests",
    "new_cell_tests",
    "dixon_overall",
    "new_overall",
    "dixon_two_class",
    "t_statistics",
    "analyze",
    "overall_from_vectors",
]

DIXON = "dixon"
NEW = "new"

# Relative variance floor below which a cell's z-score is treated as undefined.
_VAR_FLOOR = 1e-12


def _counts(table):
    if isinstance(table, Nnct):
        return np.asarray(table.counts, dtype=float)
    c = np.asarray(table, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"expected a square table, got shape {c.shape}")
    return c


def _classes(table, q):
    if isinstance(table, Nnct):
        return table.classes
    return tuple(str(k + 1) for k in range(q))


@dataclass(frozen=True, eq=False)
class CellTests:
    """Per-cell z-scores with two-sided and upper one-sided p-values.

    Cells whose null variance is zero carry ``undefined == True`` and NaN in
    ``z`` and both p-value arrays.
    """

    z: np.ndarray
    p_two_sided: np.ndarray
    p_one_sided_greater: np.ndarray
    method: str
    classes: tuple
    undefined: np.ndarray

    @property
    def q(self):
        return self.z.shape[0]

    def tags(self, alpha=0.05):
        """Interpretation of each significant cell; empty string where not significant.

        A positive diagonal z signals segregation of the class from the rest;
        a positive off-diagonal z signals the column class being found as NN
        of the row class more often than expected (association).
        """
        out = np.full(self.z.shape, "", dtype=object)
        q = self.q
        for i in range(q):
            for j in range(q):
                if self.undefined[i, j] or not self.p_two_sided[i, j] < alpha:
                    continue
                pos = self.z[i, j] > 0
                if i == j:
                    out[i, j] = "segregation" if pos else "lack of segregation"
                else:
                    out[i, j] = "association" if pos else "lack of association"
        return out

    def to_dict(self):
        def clean(a):
            return [[None if not np.isfinite(v) else float(v) for v in row] for row in a]

        return {
            "method": self.method,
            "z": clean(self.z),
            "p_two_sided": clean(self.p_two_sided),
            "p_one_sided_greater": clean(self.p_one_sided_greater),
        }


@dataclass(frozen=True)
class OverallTest:
    statistic: float
    df: int
    p: float
    method: str
    rank: int

    def to_dict(self):
        return {"method": self.method, "statistic": self.statistic, "df": self.df,
                "p": self.p, "rank": self.rank}


def _cell_tests(deviation, variance, method, classes):
    q = deviation.shape[0]
    scale = max(float(np.max(np.abs(variance))), 1.0)
    undefined = variance <= _VAR_FLOOR * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(undefined, np.nan, deviation / np.sqrt(np.where(undefined, 1.0, variance)))
    p2 = np.where(undefined, np.nan, np.minimum(1.0, 2.0 * std_normal_sf(np.abs(z))))
    p1 = np.where(undefined, np.nan, std_normal_sf(z))
    return CellTests(z.reshape(q, q), p2.reshape(q, q), p1.reshape(q, q), method,
                     tuple(classes), undefined.reshape(q, q))


def dixon_cell_tests(table, moments: CellMoments) -> CellTests:
    """``Z^D_ij = (N_ij - E[N_ij]) / sqrt(Var[N_ij])``."""
    counts = _counts(table)
    if counts.shape != moments.expected.shape:
        raise ValueError("table and moments have different numbers of classes")
    return _cell_tests(counts - moments.expected, moments.variances, DIXON,
                       _classes(table, moments.q))


def t_statistics(table, tmoments: TMoments):
    """``T_ij = N_ij - c_ij C_j`` as a ``q x q`` array."""
    counts = _counts(table)
    c = tmoments.coefficients
    if counts.shape != c.shape:
        raise ValueError("table and moments have different numbers of classes")
    return counts - c * counts.sum(axis=0)[None, :]


def new_cell_tests(table, tmoments: TMoments) -> CellTests:
    """``Z^N_ij = T_ij / sqrt(Var[T_ij])``."""
    t = t_statistics(table, tmoments)
    return _cell_tests(t, tmoments.variances, NEW, _classes(table, tmoments.q))


def overall_from_vectors(x, cov, df, method, rank=None, rtol=EIGEN_RTOL):
    """Quadratic form ``x' cov^- x`` referred to chi-square with ``df`` degrees of freedom."""
    stat, r = quadratic_form(x, cov, rank=rank, rtol=rtol)
    stat = max(stat, 0.0)
    return OverallTest(stat, int(df), chi2_sf(stat, df), method, r)


def dixon_overall(table, moments: CellMoments, rtol=EIGEN_RTOL) -> OverallTest:
    """Dixon's overall statistic ``C_D`` with ``q(q-1)`` degrees of freedom.

    The generalized inverse of ``Sigma_D`` drops eigenvalues below ``rtol``
    times the largest.
    """
    counts = _counts(table)
    q = counts.shape[0]
    dev = (counts - moments.expected).ravel()
    return overall_from_vectors(dev, moments.sigma_D, q * (q - 1), DIXON, rtol=rtol)


def new_overall(table, tmoments: TMoments) -> OverallTest:
    """New overall statistic ``C_N`` with ``(q-1)^2`` degrees of freedom.

    The generalized inverse of ``Sigma_N`` keeps exactly ``(q-1)^2``
    eigenpairs, the largest in magnitude. ``Sigma_N`` has ``q(q-1)``
    nonzero eigenvalues in exact arithmetic, but the smallest ``q - 1`` of
    them are tiny relative to the others.
    """
    t = t_statistics(table, tmoments).ravel()
    q = tmoments.q
    df = (q - 1) ** 2
    return overall_from_vectors(t, tmoments.sigma_N, df, NEW, rank=df)


def dixon_two_class(table, moments: CellMoments):
    """Two-class ``C_D`` computed two ways: the 2x2 inverse and the correlation form.

    Returns
    -------
    inverse_form, correlation_form : float
    """
    counts = _counts(table)
    if counts.shape != (2, 2):
        raise ValueError("two-class forms need a 2 x 2 table")
    s = moments.sigma_D
    y = np.array([counts[0, 0] - moments.expected[0, 0], counts[1, 1] - moments.expected[1, 1]])
    v11, v22, c12 = s[0, 0], s[3, 3], s[0, 3]
    inv_form = float(y @ np.linalg.solve(np.array([[v11, c12], [c12, v22]]), y))
    za, zb = y[0] / np.sqrt(v11), y[1] / np.sqrt(v22)
    r = c12 / np.sqrt(v11 * v22)
    corr_form = float((za**2 + zb**2 - 2 * r * za * zb) / (1 - r**2))
    return inv_form, corr_form


@dataclass(frozen=True, eq=False)
class TestReport:
    """All four tests on one table together with the inputs needed to reproduce them."""

    table: Nnct
    Q: int
    R: int
    moments: RlMoments
    dixon_cells: CellTests
    new_cells: CellTests
    dixon: OverallTest
    new: OverallTest
    pielou: tuple = field(default=None)

    __test__ = False

    @property
    def class_sizes(self):
        return self.moments.cell.class_sizes

    def to_dict(self):
        out = {
            "classes": [str(c) for c in self.table.classes],
            "class_sizes": self.class_sizes.tolist(),
            "n": int(self.class_sizes.sum()),
            "Q": self.Q,
            "R": self.R,
            "nnct": self.table.counts.tolist(),
            "expected": self.moments.expected.tolist(),
            "dixon_cells": self.dixon_cells.to_dict(),
            "new_cells": self.new_cells.to_dict(),
            "dixon_overall": self.dixon.to_dict(),
            "new_overall": self.new.to_dict(),
        }
        if self.pielou is not None:
            stat, df, p = self.pielou
            out["pielou"] = {"statistic": stat, "df": df, "p": p, "note": PIELOU_CAVEAT}
        return out


def analyze(table: Nnct, Q, R, moments: RlMoments = None) -> TestReport:
    """Run Dixon's and the new cell-specific and overall tests on ``table``.

    Parameters
    ----------
    table : Nnct
    Q, R : int
        NN graph summaries; supply them directly when only the table is known.
    moments : RlMoments, optional
        Precomputed moments for the same class sizes and ``(Q, R)``.
    """
    sizes = table.class_sizes()
    if moments is None:
        moments = rl_moments(sizes, Q, R)
    elif moments.cell.Q != Q or moments.cell.R != R:
        raise ValueError("precomputed moments were built for different Q, R")
    try:
        pearson = pielou_chisq(table)
    except ValueError:
        pearson = None
    return TestReport(
        table=table,
        Q=int(Q),
        R=int(R),
        moments=moments,
        dixon_cells=dixon_cell_tests(table, moments.cell),
        new_cells=new_cell_tests(table, moments.t),
        dixon=dixon_overall(table, moments.cell),
        new=new_overall(table, moments.t),
        pielou=pearson,
    )

