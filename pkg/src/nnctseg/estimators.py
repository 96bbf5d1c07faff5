"""scikit-learn style wrappers around the functional API.

``fit(X, y)`` takes coordinates ``X`` of shape ``(n, 2)`` and class labels
``y``. Results are stored in trailing-underscore attributes.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_X_y

from .geometry import MarkedPattern, StudyRegion, build_nn_graph
from .montecarlo import CSR_SIMULATION, RL_PERMUTATION, McConfig, csr_mc_test, randomization_test
from .secondorder import default_grid, k_bivariate, k_univariate, pcf
from .segregation import analyze
from .table import build_nnct

__all__ = ["NNCTSegregationTest", "RipleyK"]


def _pattern(X, y, classes, region):
    X, y = check_X_y(X, y, dtype=float, ensure_min_samples=2, y_numeric=False)
    if X.shape[1] != 2:
        raise ValueError(f"X must have exactly 2 columns, got {X.shape[1]}")
    if region is not None and not isinstance(region, StudyRegion):
        region = StudyRegion(*region)
    labels = y.tolist()
    return MarkedPattern.from_labels(X, labels, classes=classes, region=region)


class NNCTSegregationTest(BaseEstimator):
    """Dixon's and the new NNCT tests of segregation on one labeled pattern.

    Parameters
    ----------
    n_mc : int, default=0
        Monte Carlo replications; 0 gives asymptotic results only.
    null : {"rl", "csr"}, default="rl"
        Monte Carlo null: label randomization or CSR simulation in the region.
    seed : int, optional
        Required when ``n_mc > 0``.
    alpha : float, default=0.05
    classes : sequence, optional
        Class order; defaults to order of first appearance in ``y``.
    region : StudyRegion or 4-tuple, optional
        Defaults to the bounding box of ``X``.
    workers : int, default=1

    Attributes
    ----------
    classes_ : tuple
    nnct_ : Nnct
    Q_, R_ : int
    report_ : TestReport
    dixon_z_, new_z_ : ndarray of shape (q, q)
    C_D_, C_N_ : float
    p_C_D_, p_C_N_ : float
        Asymptotic p-values of the overall tests.
    mc_report_ : McTestReport or None
    """

    def __init__(self, n_mc=0, null="rl", seed=None, alpha=0.05, classes=None, region=None,
                 workers=1):
        self.n_mc = n_mc
        self.null = null
        self.seed = seed
        self.alpha = alpha
        self.classes = classes
        self.region = region
        self.workers = workers

    def fit(self, X, y):
        if self.null not in ("rl", "csr"):
            raise ValueError(f"null must be 'rl' or 'csr', got {self.null!r}")
        if self.n_mc and self.seed is None:
            raise ValueError("a seed is required for Monte Carlo tests")
        pattern = _pattern(X, y, self.classes, self.region)
        graph = build_nn_graph(pattern)
        table = build_nnct(pattern, graph)
        report = analyze(table, graph.Q, graph.R)
        self.pattern_ = pattern
        self.classes_ = pattern.classes
        self.nn_graph_ = graph
        self.nnct_ = table
        self.Q_, self.R_ = graph.Q, graph.R
        self.report_ = report
        self.dixon_z_ = report.dixon_cells.z
        self.new_z_ = report.new_cells.z
        self.C_D_, self.C_N_ = report.dixon.statistic, report.new.statistic
        self.p_C_D_, self.p_C_N_ = report.dixon.p, report.new.p
        self.mc_report_ = None
        if self.n_mc:
            model = RL_PERMUTATION if self.null == "rl" else CSR_SIMULATION
            cfg = McConfig(n_mc=int(self.n_mc), seed=self.seed, alpha=self.alpha,
                           null_model=model, workers=self.workers)
            run = randomization_test if model == RL_PERMUTATION else csr_mc_test
            self.mc_report_ = run(pattern, cfg)
        return self

    def summary(self):
        check_is_fitted(self, "report_")
        out = self.report_.to_dict()
        if self.mc_report_ is not None:
            out["monte_carlo"] = self.mc_report_.to_dict()
        return out


class RipleyK(BaseEstimator):
    """Univariate and bivariate Ripley K/L estimates for every class.

    Parameters
    ----------
    t_values : array-like, optional
        Distance grid; defaults to 128 values up to a quarter of the smaller side.
    region : StudyRegion or 4-tuple, optional
    bandwidth : float, optional
        Pair correlation bandwidth; see :func:`nnctseg.secondorder.pcf`.

    Attributes
    ----------
    t_ : ndarray
    k_ : dict
        ``k_[a]`` for class ``a`` and ``k_[(a, b)]`` for ordered pairs.
    l_minus_t_ : dict
    pcf_ : dict
        Univariate pair correlation per class.
    """

    def __init__(self, t_values=None, region=None, bandwidth=None):
        self.t_values = t_values
        self.region = region
        self.bandwidth = bandwidth

    def fit(self, X, y):
        pattern = _pattern(X, y, None, self.region)
        grid = default_grid(pattern.region) if self.t_values is None else np.asarray(self.t_values)
        self.classes_ = pattern.classes
        self.k_, self.l_minus_t_, self.pcf_ = {}, {}, {}
        sizes = pattern.class_sizes
        for a_idx, a in enumerate(pattern.classes):
            if sizes[a_idx] >= 2:
                est = k_univariate(pattern, a_idx, grid)
                self.k_[a] = est.k_hat
                self.l_minus_t_[a] = est.l_minus_t
                self.pcf_[a] = pcf(est, self.bandwidth).g_hat
            for b_idx, b in enumerate(pattern.classes):
                if a_idx != b_idx:
                    est = k_bivariate(pattern, a_idx, b_idx, grid)
                    self.k_[(a, b)] = est.k_hat
                    self.l_minus_t_[(a, b)] = est.l_minus_t
        self.t_ = est.t
        return self
