"""Brute-force references used to validate the analytic code paths.

Nothing here is fast. Each function recomputes a quantity from its
definition so the closed forms elsewhere in the package can be checked
against it.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .geometry import DuplicatePointError, NnGraph, StudyRegion, squared_distances_from

__all__ = [
    "ENUMERATION_LIMIT",
    "EnumerationTooLargeError",
    "ExactMoments",
    "multinomial",
    "multiset_permutations",
    "exhaustive_rl_moments",
    "brute_nn",
    "naive_k",
    "naive_edge_weight",
]

ENUMERATION_LIMIT = 10**6


class EnumerationTooLargeError(ValueError):
    """The number of distinct labelings exceeds :data:`ENUMERATION_LIMIT`."""


def multinomial(sizes):
    out = factorial(sum(sizes))
    for s in sizes:
        out //= factorial(s)
    return out


def multiset_permutations(items):
    """Yield every distinct permutation of ``items`` in lexicographic order."""
    a = sorted(items)
    n = len(a)
    while True:
        yield tuple(a)
        i = n - 2
        while i >= 0 and a[i] >= a[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while a[j] <= a[i]:
            j -= 1
        a[i], a[j] = a[j], a[i]
        a[i + 1:] = reversed(a[i + 1:])


@dataclass(frozen=True, eq=False)
class ExactMoments:
    """Exact random-labeling moments obtained by complete enumeration.

    Matrices of :class:`fractions.Fraction` are object arrays; the ``*_float``
    properties convert them.
    """

    expected: np.ndarray
    covariance: np.ndarray
    t_covariance: np.ndarray
    n_labelings: int

    @property
    def expected_float(self):
        return self.expected.astype(float)

    @property
    def covariance_float(self):
        return self.covariance.astype(float)

    @property
    def t_covariance_float(self):
        return self.t_covariance.astype(float)


def _as_nn_index(graph):
    if isinstance(graph, NnGraph):
        return np.asarray(graph.nn_index)
    return np.asarray(graph, dtype=np.intp)


def exhaustive_rl_moments(graph, class_sizes) -> ExactMoments:
    """Enumerate every labeling of the graph's nodes with the given class sizes.

    For each labeling the NNCT and the scaled statistics
    ``(n-1) T_ij = (n-1) N_ij - (n_i - [i=j]) C_j`` are formed in integer
    arithmetic; moments are divided out once at the end.

    Raises
    ------
    EnumerationTooLargeError
        If the multinomial coefficient exceeds :data:`ENUMERATION_LIMIT`.
    """
    nn = _as_nn_index(graph)
    sizes = [int(s) for s in class_sizes]
    n = nn.size
    q = len(sizes)
    if sum(sizes) != n:
        raise ValueError(f"class sizes sum to {sum(sizes)}, graph has {n} nodes")
    if any(s <= 0 for s in sizes):
        raise ValueError("class sizes must be positive")
    count = multinomial(sizes)
    if count > ENUMERATION_LIMIT:
        raise EnumerationTooLargeError(f"{count} labelings exceed the limit {ENUMERATION_LIMIT}")

    base = [k for k, s in enumerate(sizes) for _ in range(s)]
    s1 = [0] * (q * q)
    s2 = [[0] * (q * q) for _ in range(q * q)]
    t1 = [0] * (q * q)
    t2 = [[0] * (q * q) for _ in range(q * q)]
    for lab in multiset_permutations(base):
        cells = [0] * (q * q)
        for x in range(n):
            cells[lab[x] * q + lab[nn[x]]] += 1
        cols = [sum(cells[k * q + j] for k in range(q)) for j in range(q)]
        t = [
            (n - 1) * cells[i * q + j] - (sizes[i] - (i == j)) * cols[j]
            for i in range(q) for j in range(q)
        ]
        for a in range(q * q):
            s1[a] += cells[a]
            t1[a] += t[a]
            ra, ta = s2[a], t2[a]
            ca, tta = cells[a], t[a]
            for b in range(q * q):
                ra[b] += ca * cells[b]
                ta[b] += tta * t[b]

    L = count
    expected = np.empty((q, q), dtype=object)
    cov = np.empty((q * q, q * q), dtype=object)
    tcov = np.empty((q * q, q * q), dtype=object)
    for a in range(q * q):
        expected[a // q, a % q] = Fraction(s1[a], L)
        for b in range(q * q):
            cov[a, b] = Fraction(L * s2[a][b] - s1[a] * s1[b], L * L)
            tcov[a, b] = Fraction(L * t2[a][b] - t1[a] * t1[b], L * L * (n - 1) ** 2)
    return ExactMoments(expected, cov, tcov, L)


def brute_nn(points):
    """Nearest neighbor of every point by an O(n^2) scan; ties go to the smallest index."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points")
    out = np.empty(n, dtype=np.intp)
    others = np.arange(n)
    for i in range(n):
        cand = others[others != i]
        d2 = squared_distances_from(pts, i, cand)
        if np.any(d2 == 0):
            raise DuplicatePointError(f"point {i} has a duplicate")
        best = None
        for j, dj in zip(cand, d2):
            if best is None or dj < best[1]:
                best = (j, dj)
        out[i] = best[0]
    return out


def naive_edge_weight(center, d, region: StudyRegion, samples=200_000):
    """Fraction of the circle of radius ``d`` around ``center`` inside ``region``, by dense sampling."""
    theta = (np.arange(samples) + 0.5) * (2 * np.pi / samples)
    x = center[0] + d * np.cos(theta)
    y = center[1] + d * np.sin(theta)
    inside = (x >= region.xmin) & (x <= region.xmax) & (y >= region.ymin) & (y <= region.ymax)
    return float(inside.mean())


def naive_k(points_i, points_j, t_values, region: StudyRegion, weight, same_class):
    """Double-loop Ripley K estimate with a caller-supplied scalar edge weight.

    ``weight(center, d)`` must return the in-region circumference fraction.
    For ``same_class`` the estimate is ``A / N^2 * sum_{x != y} 1{d < t} / w``;
    otherwise the cross estimate averages the weights centered at both ends
    and scales by ``A / (N_i N_j)``.
    """
    pi = np.asarray(points_i, dtype=float)
    pj = np.asarray(points_j, dtype=float)
    t_values = np.asarray(t_values, dtype=float)
    total = np.zeros(t_values.size)
    for a in range(pi.shape[0]):
        for b in range(pj.shape[0]):
            if same_class and a == b:
                continue
            d = float(np.hypot(pi[a, 0] - pj[b, 0], pi[a, 1] - pj[b, 1]))
            if same_class:
                inv = 1.0 / weight(pi[a], d)
            else:
                inv = 0.5 * (1.0 / weight(pi[a], d) + 1.0 / weight(pj[b], d))
            total += np.where(d < t_values, inv, 0.0)
    if same_class:
        return region.area * total / pi.shape[0] ** 2
    return region.area * total / (pi.shape[0] * pj.shape[0])
