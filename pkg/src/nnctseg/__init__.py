"""Nearest neighbor contingency table (NNCT) tests of spatial segregation.

The main entry points:

* :func:`build_nn_graph` and :func:`build_nnct` turn a :class:`MarkedPattern`
  into an NN graph summary (``Q``, ``R``) and a table.
* :func:`analyze` runs Dixon's tests and the new tests on a table.
* :func:`randomization_test`, :func:`csr_mc_test` and :func:`rate_experiment`
  give Monte Carlo p-values and empirical size or power.
* :func:`k_univariate`, :func:`k_bivariate`, :func:`pcf` and :func:`envelope`
  give second-order summaries.
* :class:`NNCTSegregationTest` and :class:`RipleyK` are scikit-learn style
  wrappers.
"""

__version__ = "0.1.0"

from .geometry import DuplicatePointError, MarkedPattern, NnGraph, StudyRegion, build_nn_graph
from .table import Nnct, build_nnct, pielou_chisq
from .moments import (NegativeVarianceError, PairProbabilities, RlMoments, cell_cov_matrix,
                      expected_counts, pair_probabilities, rl_moments, t_cov_matrix)
from .numerics import generalized_inverse, quadratic_form, rng_stream
from .segregation import CellTests, OverallTest, TestReport, analyze
from .generators import format_spec, generate, parse_spec
from .montecarlo import (McConfig, McTestReport, RateTable, csr_mc_test, mc_critical_values,
                         randomization_test, rate_experiment)
from .secondorder import DistanceGrid, edge_weight, envelope, k_bivariate, k_univariate, pcf
from .io import DataError, read_pattern_csv, read_table_csv
from .fixtures import run_fixture
from .estimators import NNCTSegregationTest, RipleyK

__all__ = [
    "__version__",
    "DuplicatePointError", "MarkedPattern", "NnGraph", "StudyRegion", "build_nn_graph",
    "Nnct", "build_nnct", "pielou_chisq",
    "NegativeVarianceError", "PairProbabilities", "RlMoments", "cell_cov_matrix",
    "expected_counts", "pair_probabilities", "rl_moments", "t_cov_matrix",
    "generalized_inverse", "quadratic_form", "rng_stream",
    "CellTests", "OverallTest", "TestReport", "analyze",
    "format_spec", "generate", "parse_spec",
    "McConfig", "McTestReport", "RateTable", "csr_mc_test", "mc_critical_values",
    "randomization_test", "rate_experiment",
    "DistanceGrid", "edge_weight", "envelope", "k_bivariate", "k_univariate", "pcf",
    "DataError", "read_pattern_csv", "read_table_csv",
    "run_fixture",
    "NNCTSegregationTest", "RipleyK",
]
