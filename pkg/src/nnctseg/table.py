"""Nearest neighbor contingency tables and Pielou's chi-square."""

from dataclasses import dataclass

import numpy as np

from .geometry import MarkedPattern, NnGraph
from .numerics import chi2_sf

__all__ = ["Nnct", "build_nnct", "pielou_chisq", "PIELOU_CAVEAT"]

PIELOU_CAVEAT = "inappropriate for completely mapped data"


@dataclass(frozen=True, eq=False)
class Nnct:
    """A ``q x q`` table; ``counts[i, j]`` is the number of class-``i`` points whose NN is class ``j``.

    Row sums are the class sizes ``n_i`` and are fixed under random labeling;
    column sums ``C_j`` are random.
    """

    counts: np.ndarray
    classes: tuple

    def __post_init__(self):
        c = np.array(self.counts)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 1:
            raise ValueError(f"counts must be a square matrix, got shape {c.shape}")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise ValueError("counts must be finite and nonnegative")
        if np.issubdtype(c.dtype, np.floating) and np.all(c == np.round(c)):
            c = c.astype(np.int64)
        elif not np.issubdtype(c.dtype, np.number) or np.issubdtype(c.dtype, np.bool_):
            raise ValueError("counts must be numeric")
        classes = tuple(self.classes)
        if len(classes) != c.shape[0] or len(set(classes)) != len(classes):
            raise ValueError("need one distinct class identifier per row")
        if np.any(c.sum(axis=1) == 0):
            raise ValueError("empty class: every row of the table needs at least one point")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "classes", classes)

    @classmethod
    def from_counts(cls, counts, classes=None):
        counts = np.asarray(counts)
        if classes is None:
            classes = tuple(str(k + 1) for k in range(counts.shape[0]))
        return cls(counts, classes)

    @property
    def q(self):
        return self.counts.shape[0]

    @property
    def row_sums(self):
        return self.counts.sum(axis=1)

    @property
    def col_sums(self):
        return self.counts.sum(axis=0)

    @property
    def n(self):
        return self.counts.sum()

    @property
    def is_integral(self):
        return np.issubdtype(self.counts.dtype, np.integer)

    def class_sizes(self):
        """Row sums as integers; fails for real-valued synthetic tables that are not integral."""
        rs = self.row_sums
        if not np.allclose(rs, np.round(rs), rtol=0, atol=1e-9 * max(1.0, float(rs.max()))):
            raise ValueError("row sums are not integral class sizes")
        return np.round(rs).astype(np.int64)

    def permuted(self, order):
        """Table with classes reordered; ``order[k]`` is the old index placed at position ``k``."""
        order = np.asarray(order)
        return Nnct(self.counts[np.ix_(order, order)], tuple(self.classes[k] for k in order))

    def to_dict(self):
        return {"classes": [str(c) for c in self.classes], "counts": self.counts.tolist()}


def build_nnct(pattern: MarkedPattern, graph: NnGraph) -> Nnct:
    """Cross-tabulate each point's class against its nearest neighbor's class."""
    if graph.n != pattern.n:
        raise ValueError(f"graph has {graph.n} points but pattern has {pattern.n}")
    q = pattern.q
    base = pattern.labels
    nbr = pattern.labels[graph.nn_index]
    counts = np.bincount(base * q + nbr, minlength=q * q).reshape(q, q)
    return Nnct(counts, pattern.classes)


def pielou_chisq(table):
    """Pearson's chi-square test of independence on the NNCT.

    Kept only for comparison: the cell counts of a mapped pattern are not
    independent, so the nominal ``(q-1)^2`` reference distribution does not
    apply.

    Returns
    -------
    statistic : float
    df : int
    p : float
    """
    counts = np.asarray(table.counts if isinstance(table, Nnct) else table, dtype=float)
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    if np.any(rows <= 0) or np.any(cols <= 0):
        raise ValueError("Pearson's chi-square needs positive row and column sums")
    expected = np.outer(rows, cols) / counts.sum()
    stat = float(np.sum((counts - expected) ** 2 / expected))
    q = counts.shape[0]
    df = (q - 1) ** 2
    if df == 0:
        return stat, 0, 1.0
    return stat, df, chi2_sf(max(stat, 0.0), df)
