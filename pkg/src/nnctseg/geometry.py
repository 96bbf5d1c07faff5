"""Marked planar point patterns and their nearest neighbor digraph.

Everything the random-labeling moments need from the geometry is carried by
:class:`NnGraph`: the nearest neighbor of each point, the number of ordered
reflexive pairs ``R`` and the shared-neighbor count ``Q``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "DuplicatePointError",
    "StudyRegion",
    "MarkedPattern",
    "NnGraph",
    "build_nn_graph",
    "squared_distances_from",
]

# Query this many neighbours first; ties spilling past it fall back to a ball query.
_K_CANDIDATES = 4


class DuplicatePointError(ValueError):
    """Two points share identical coordinates, so the NN relation is undefined."""


@dataclass(frozen=True)
class StudyRegion:
    """Axis-aligned rectangular window ``[xmin, xmax] x [ymin, ymax]``."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.xmax, self.ymin, self.ymax)
        if not all(np.isfinite(vals)):
            raise ValueError(f"region bounds must be finite, got {vals}")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(f"degenerate region {vals}")

    @classmethod
    def unit(cls):
        return cls(0.0, 1.0, 0.0, 1.0)

    @classmethod
    def bounding(cls, points, include=None):
        """Bounding box of ``points``, optionally enlarged to contain region ``include``."""
        pts = np.asarray(points, dtype=float)
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        if include is not None:
            lo = np.minimum(lo, [include.xmin, include.ymin])
            hi = np.maximum(hi, [include.xmax, include.ymax])
        # a collinear pattern still needs positive area
        span = np.where(hi > lo, 0.0, 0.5)
        return cls(float(lo[0] - span[0]), float(hi[0] + span[0]),
                   float(lo[1] - span[1]), float(hi[1] + span[1]))

    @property
    def width(self):
        return self.xmax - self.xmin

    @property
    def height(self):
        return self.ymax - self.ymin

    @property
    def area(self):
        return self.width * self.height

    def contains(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return ((pts[:, 0] >= self.xmin) & (pts[:, 0] <= self.xmax)
                & (pts[:, 1] >= self.ymin) & (pts[:, 1] <= self.ymax))

    def as_tuple(self):
        return (self.xmin, self.xmax, self.ymin, self.ymax)


@dataclass(frozen=True, eq=False)
class MarkedPattern:
    """Planar points with class labels.

    ``labels`` holds integer codes into ``classes``; use :meth:`from_labels`
    to build a pattern from arbitrary class tokens.
    """

    points: np.ndarray
    labels: np.ndarray
    classes: tuple
    region: StudyRegion

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        lab = np.array(self.labels, dtype=np.intp)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
        if lab.shape != (pts.shape[0],):
            raise ValueError("points and labels differ in length")
        if pts.shape[0] < 2:
            raise ValueError("a pattern needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("coordinates must be finite")
        q = len(self.classes)
        if len(set(self.classes)) != q:
            raise ValueError("class identifiers must be distinct")
        if lab.min() < 0 or lab.max() >= q:
            raise ValueError("label codes must index into classes")
        pts.setflags(write=False)
        lab.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "classes", tuple(self.classes))

    @classmethod
    def from_labels(cls, points, labels, classes=None, region=None):
        """Build a pattern from class tokens; class order defaults to first appearance."""
        labels = list(labels)
        if classes is None:
            classes = list(dict.fromkeys(labels))
        else:
            classes = list(classes)
            unknown = set(labels) - set(classes)
            if unknown:
                raise ValueError(f"labels not among classes: {sorted(map(str, unknown))}")
        code = {c: k for k, c in enumerate(classes)}
        pts = np.asarray(points, dtype=float)
        if region is None:
            region = StudyRegion.bounding(pts)
        return cls(pts, np.array([code[c] for c in labels], dtype=np.intp), tuple(classes), region)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def q(self):
        return len(self.classes)

    @property
    def class_sizes(self):
        return np.bincount(self.labels, minlength=self.q)

    @property
    def label_tokens(self):
        return [self.classes[k] for k in self.labels]

    def relabel(self, labels):
        """Same locations and region with new label codes."""
        return MarkedPattern(self.points, labels, self.classes, self.region)

    def class_points(self, k):
        return self.points[self.labels == k]


@dataclass(frozen=True, eq=False)
class NnGraph:
    """Nearest neighbor digraph of a pattern plus its join-count summaries.

    Attributes
    ----------
    nn_index : ndarray of int
        ``nn_index[i]`` is the nearest neighbor of point ``i``.
    nn_distance : ndarray of float
    in_degree : ndarray of int
        Number of points whose nearest neighbor is ``i``.
    R : int
        Number of ordered reflexive pairs (twice the number of mutual NN pairs).
    Q : int
        Shared-neighbor count ``sum_i d_i (d_i - 1)``.
    q_counts : dict
        ``q_counts[k]`` is the number of points serving as NN exactly ``k`` times, ``k >= 2``.
    """

    nn_index: np.ndarray
    nn_distance: np.ndarray
    in_degree: np.ndarray
    R: int
    Q: int
    q_counts: dict = field(default_factory=dict)

    @classmethod
    def from_nn_index(cls, nn_index, nn_distance=None):
        nn = np.asarray(nn_index, dtype=np.intp)
        n = nn.size
        if np.any(nn == np.arange(n)):
            raise ValueError("a point cannot be its own nearest neighbor")
        deg = np.bincount(nn, minlength=n)
        R = int(np.count_nonzero(nn[nn] == np.arange(n)))
        Q = int(np.sum(deg * (deg - 1)))
        counts = np.bincount(deg)
        q_counts = {k: int(counts[k]) for k in range(2, counts.size) if counts[k]}
        if nn_distance is None:
            nn_distance = np.full(n, np.nan)
        return cls(nn, np.asarray(nn_distance, dtype=float), deg, R, Q, q_counts)

    @property
    def n(self):
        return self.nn_index.size

    def q_from_counts(self):
        """``Q`` recomputed as ``2 * sum_k C(k, 2) Q_k``."""
        return 2 * sum(k * (k - 1) // 2 * c for k, c in self.q_counts.items())


def squared_distances_from(points, i, candidates):
    """Squared Euclidean distances from point ``i`` to ``candidates``.

    Shared by the indexed search and the brute-force oracle so both compare
    bit-identical floating point values when breaking ties.
    """
    dx = points[candidates, 0] - points[i, 0]
    dy = points[candidates, 1] - points[i, 1]
    return dx * dx + dy * dy


def _check_duplicates(points):
    if np.unique(points, axis=0).shape[0] != points.shape[0]:
        raise DuplicatePointError("duplicate coordinates; nearest neighbors are undefined")


def _resolve(points, i, candidates):
    candidates = np.asarray(candidates, dtype=np.intp)
    candidates = candidates[candidates != i]
    d2 = squared_distances_from(points, i, candidates)
    best = d2.min()
    return int(candidates[d2 == best].min()), best


def build_nn_graph(pattern):
    """Nearest neighbor digraph of ``pattern`` (or of an ``(n, 2)`` coordinate array).

    Ties at exactly equal distance go to the smallest point index.

    Raises
    ------
    DuplicatePointError
        If two points coincide.
    ValueError
        If fewer than two points are given.
    """
    points = pattern.points if isinstance(pattern, MarkedPattern) else np.asarray(pattern, float)
    n = points.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points")
    _check_duplicates(points)
    tree = cKDTree(points)
    k = min(_K_CANDIDATES, n)
    _, idx = tree.query(points, k=k)
    idx = np.asarray(idx, dtype=np.intp).reshape(n, k)
    # same arithmetic as squared_distances_from, so ties compare identically
    dx = points[idx, 0] - points[:, None, 0]
    dy = points[idx, 1] - points[:, None, 1]
    d2 = dx * dx + dy * dy
    is_self = idx == np.arange(n)[:, None]
    d2 = np.where(is_self, np.inf, d2)
    best = d2.min(axis=1)
    tied = d2 == best[:, None]
    nn = np.where(tied, idx, n).min(axis=1)
    if k < n:
        # all non-self candidates tie: the tie set may extend past the k returned
        spill = np.flatnonzero(tied.sum(axis=1) == k - is_self.sum(axis=1))
        for i in spill:
            ball = tree.query_ball_point(points[i], np.sqrt(best[i]) * (1 + 1e-9) + 1e-300)
            nn[i], best[i] = _resolve(points, i, ball)
    return NnGraph.from_nn_index(nn, np.sqrt(best))
