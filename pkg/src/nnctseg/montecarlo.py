"""Monte Carlo inference and empirical size/power experiments.

Replication ``i`` always draws from ``rng_stream(seed, i)``. Replications
run in chunks, possibly in worker processes, and are reassembled in index
order. The output therefore does not depend on how many workers are used.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import numpy as np
from scipy import special

from .generators import CsrUniform, RandomLabel, RlCase, default_class_names, format_spec
from .geometry import MarkedPattern, StudyRegion, build_nn_graph
from .moments import rl_moments
from .numerics import SpectralForm, aux_stream, chi2_isf, rng_stream
from .segregation import (_VAR_FLOOR, dixon_cell_tests, dixon_overall, new_cell_tests, new_overall,
                          t_statistics)
from .table import build_nnct

__all__ = [
    "RL_PERMUTATION",
    "CSR_SIMULATION",
    "McConfig",
    "McTestReport",
    "RateTable",
    "statistic_names",
    "statistics_vector",
    "pattern_statistics",
    "randomization_test",
    "csr_mc_test",
    "mc_critical_values",
    "order_statistic_critical",
    "proportion_thresholds",
    "rate_experiment",
    "replicate_statistics",
    "run_indexed",
    "default_workers",
]

RL_PERMUTATION = "rl_permutation"
CSR_SIMULATION = "csr_simulation"
TWO_SIDED = "two-sided"
GREATER = "greater"


@dataclass(frozen=True)
class McConfig:
    """Settings shared by the Monte Carlo tests and experiments.

    Parameters
    ----------
    n_mc : int
        Number of replications.
    seed : int
        Root seed; replication ``i`` uses ``rng_stream(seed, i)``.
    alpha : float
        Nominal level.
    null_model : str
        ``"rl_permutation"`` or ``"csr_simulation"``.
    region : StudyRegion, optional
        Window for CSR simulation; defaults to the pattern's region.
    workers : int
        Worker processes; 1 runs in-process.
    alternative : str
        ``"two-sided"`` or ``"greater"`` for the cell tests.
    keep_replicates : bool
        Retain the per-replication statistics in reports.
    verify_qr : bool
        Recompute the NN graph in every random-labeling replication and check
        that ``Q`` and ``R`` stay fixed.
    """

    n_mc: int
    seed: int
    alpha: float = 0.05
    null_model: str = RL_PERMUTATION
    region: Optional[StudyRegion] = None
    workers: int = 1
    alternative: str = TWO_SIDED
    keep_replicates: bool = False
    verify_qr: bool = False

    def __post_init__(self):
        if int(self.n_mc) != self.n_mc or self.n_mc < 1:
            raise ValueError(f"n_mc must be a positive integer, got {self.n_mc}")
        if self.seed is None:
            raise ValueError("a seed is required")
        if not 0 <= self.alpha < 1:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.null_model not in (RL_PERMUTATION, CSR_SIMULATION):
            raise ValueError(f"unknown null model {self.null_model!r}")
        if self.alternative not in (TWO_SIDED, GREATER):
            raise ValueError(f"unknown alternative {self.alternative!r}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


# ---------------------------------------------------------------- statistics


def statistic_names(q):
    """Names of the entries of :func:`statistics_vector` for ``q`` classes."""
    cells = [f"{i + 1},{j + 1}" for i in range(q) for j in range(q)]
    return [f"D({c})" for c in cells] + [f"N({c})" for c in cells] + ["C_D", "C_N"]


def overall_forms(moments):
    """Cached quadratic forms for ``C_D`` and ``C_N`` under fixed moments.

    They reproduce :func:`dixon_overall` and :func:`new_overall` exactly.
    """
    q = moments.cell.q
    return SpectralForm(moments.sigma_D), SpectralForm(moments.sigma_N, rank=(q - 1) ** 2)


def statistics_vector(table, moments, forms=None):
    """Dixon z (row-major), new z (row-major), ``C_D`` and ``C_N`` in one vector.

    ``forms`` from :func:`overall_forms` skips the eigendecompositions.
    """
    zd = dixon_cell_tests(table, moments.cell).z.ravel()
    zn = new_cell_tests(table, moments.t).z.ravel()
    if forms is None:
        cd = dixon_overall(table, moments.cell).statistic
        cn = new_overall(table, moments.t).statistic
    else:
        counts = np.asarray(table.counts, dtype=float)
        cd = max(forms[0]((counts - moments.expected).ravel()), 0.0)
        cn = max(forms[1](t_statistics(table, moments.t).ravel()), 0.0)
    return np.concatenate([zd, zn, [cd, cn]])


def pattern_statistics(pattern: MarkedPattern):
    """Statistics vector and ``(Q, R)`` of one pattern."""
    graph = build_nn_graph(pattern)
    table = build_nnct(pattern, graph)
    moments = rl_moments(table.class_sizes(), graph.Q, graph.R)
    return statistics_vector(table, moments), graph.Q, graph.R


def _tail_value(stats, q, alternative):
    """Map statistics to the scale on which large values reject."""
    out = np.array(stats, dtype=float, copy=True)
    cells = slice(0, 2 * q * q)
    if alternative == TWO_SIDED:
        out[..., cells] = np.abs(out[..., cells])
    return out


def _asymptotic_criticals(q, alpha, alternative):
    if alpha <= 0:
        return np.full(2 * q * q + 2, np.inf)
    zc = special.ndtri(1 - alpha / 2) if alternative == TWO_SIDED else special.ndtri(1 - alpha)
    crit = np.full(2 * q * q + 2, float(zc))
    crit[-2] = chi2_isf(alpha, q * (q - 1))
    crit[-1] = chi2_isf(alpha, (q - 1) ** 2)
    return crit


# ---------------------------------------------------------------- execution


@dataclass(frozen=True, eq=False)
class _Job:
    """Picklable description of one replication batch."""

    kind: str
    seed: int
    spec: object = None
    pattern: MarkedPattern = None
    region: StudyRegion = None
    stream: str = "rep"
    verify_qr: bool = False
    moments: object = None
    forms: tuple = None
    graph_nn: np.ndarray = None
    Q: int = 0
    R: int = 0


def _stream(job, i):
    if job.stream == "rep":
        return rng_stream(job.seed, i)
    # critical-value replications; aux index 0 is reserved for fixed locations
    return aux_stream(job.seed, i + 1)


def _batched_z(dev, var):
    scale = max(float(np.max(np.abs(var))), 1.0)
    undefined = (var <= _VAR_FLOOR * scale).ravel()
    sd = np.sqrt(np.where(undefined, 1.0, var.ravel()))
    z = dev / sd[None, :]
    z[:, undefined] = np.nan
    return z


def _batched_form(form, x):
    # row-wise reductions in a fixed order, so a row never depends on its batch
    proj = np.sum(x[:, None, :] * form.basis[None, :, :], axis=2)
    return np.maximum(np.sum(proj * proj / form.eigenvalues[None, :], axis=1), 0.0)


def _relabel_batch(job, start, stop):
    """Statistics of relabeling replications ``start .. stop-1`` as array operations."""
    m = stop - start
    labels = np.empty((m, job.pattern.n), dtype=np.intp)
    for r, i in enumerate(range(start, stop)):
        labels[r] = _stream(job, i).permutation(job.pattern.labels)
        if job.verify_qr:
            g = build_nn_graph(job.pattern.points)
            if (g.Q, g.R) != (job.Q, job.R):
                raise AssertionError("Q and R changed under random labeling")
    return _label_stats(job, labels)


def _label_stats(job, labels):
    """Statistics for each row of an ``(m, n)`` array of label codes."""
    q = job.pattern.q
    m = labels.shape[0]
    cell = labels * q + labels[:, job.graph_nn]
    offsets = (np.arange(m) * q * q)[:, None]
    counts = np.bincount((cell + offsets).ravel(), minlength=m * q * q).reshape(m, q * q)
    counts = counts.astype(float)
    mom = job.moments
    dev = counts - mom.expected.ravel()[None, :]
    colsum = counts.reshape(m, q, q).sum(axis=1)
    t = (counts.reshape(m, q, q) - mom.t.coefficients[None] * colsum[:, None, :]).reshape(m, -1)
    zd = _batched_z(dev, mom.cell.variances)
    zn = _batched_z(t, mom.t.variances)
    cd = _batched_form(job.forms[0], dev)
    cn = _batched_form(job.forms[1], t)
    return np.column_stack([zd, zn, cd, cn])


def _run_one(job, i):
    if job.kind == "relabel":
        return _relabel_batch(job, i, i + 1)[0]
    rng = _stream(job, i)
    if job.kind == "csr":
        sizes = job.pattern.class_sizes
        pattern = CsrUniform(tuple(sizes), job.region).sample(rng)
        return pattern_statistics(pattern)[0]
    if job.kind == "spec":
        return pattern_statistics(job.spec.sample(rng))[0]
    raise ValueError(job.kind)


def _run_chunk(fn, start, stop):
    return np.vstack([np.atleast_1d(fn(i)) for i in range(start, stop)])


def _chunks(chunk_fn, n, workers):
    if workers <= 1 or n < 2:
        return chunk_fn(0, n)
    n_chunks = min(n, 4 * workers)
    bounds = np.linspace(0, n, n_chunks + 1).round().astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(chunk_fn, int(a), int(b))
                   for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        return np.vstack([f.result() for f in futures])


def run_indexed(fn, n, workers=1):
    """Evaluate picklable ``fn(i)`` for ``i = 0 .. n-1`` and stack the rows in index order.

    With ``workers > 1`` contiguous index ranges go to a process pool. Each
    row depends only on its index, so the result is the same for any
    worker count.
    """
    return _chunks(partial(_run_chunk, fn), n, workers)


def replicate_statistics(job, n_mc, workers=1):
    """Statistics of replications ``0 .. n_mc-1`` of ``job``, one row each."""
    if job.kind == "relabel":
        return _chunks(partial(_relabel_batch, job), n_mc, workers)
    return run_indexed(partial(_run_one, job), n_mc, workers)


def default_workers():
    """Worker count from ``NNCT_WORKERS``, else 1."""
    raw = os.environ.get("NNCT_WORKERS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        raise ValueError(f"NNCT_WORKERS must be an integer, got {raw!r}") from None


def _relabel_job(pattern, seed, stream="rep", verify_qr=False):
    graph = build_nn_graph(pattern)
    sizes = pattern.class_sizes
    moments = rl_moments(sizes, graph.Q, graph.R)
    job = _Job("relabel", seed, pattern=pattern, stream=stream, verify_qr=verify_qr,
               moments=moments, forms=overall_forms(moments), graph_nn=graph.nn_index,
               Q=graph.Q, R=graph.R)
    return job, graph


# ------------------------------------------------------------------- reports


@dataclass(frozen=True, eq=False)
class McTestReport:
    """Observed statistics with Monte Carlo p-values and null critical values."""

    names: list
    observed: np.ndarray
    p_mc: np.ndarray
    p_mc_greater: np.ndarray
    critical_values: np.ndarray
    null_model: str
    n_mc: int
    seed: int
    alpha: float
    Q: int
    R: int
    class_sizes: tuple
    replicates: Optional[np.ndarray] = None

    def to_dict(self):
        def f(v):
            return None if not np.isfinite(v) else float(v)

        return {
            "null_model": self.null_model,
            "n_mc": self.n_mc,
            "seed": self.seed,
            "alpha": self.alpha,
            "statistics": [
                {"name": n, "observed": f(o), "p_mc": f(p), "p_mc_greater": f(g), "critical": f(c)}
                for n, o, p, g, c in zip(self.names, self.observed, self.p_mc,
                                         self.p_mc_greater, self.critical_values)
            ],
        }


def order_statistic_critical(values, alpha):
    """The ``ceil((1 - alpha) n)``-th smallest of ``values`` (NaN ignored).

    ``alpha == 0`` gives ``+inf`` so that nothing is rejected.
    """
    v = np.sort(np.asarray(values, dtype=float)[np.isfinite(values)])
    if v.size == 0:
        return np.nan
    if alpha <= 0:
        return math.inf
    # guard against (1 - alpha) * n landing just above an integer
    k = math.ceil((1 - alpha) * v.size - 1e-9)
    k = min(max(k, 1), v.size)
    return float(v[k - 1])


def _mc_pvalues(observed, reps, q):
    n = reps.shape[0]
    tail_obs = _tail_value(observed, q, TWO_SIDED)
    tail_rep = _tail_value(reps, q, TWO_SIDED)
    with np.errstate(invalid="ignore"):
        ge = np.sum(tail_rep >= tail_obs - 1e-12 * np.maximum(1.0, np.abs(tail_obs)), axis=0)
        ge1 = np.sum(reps >= observed - 1e-12 * np.maximum(1.0, np.abs(observed)), axis=0)
    p = (1.0 + ge) / (1.0 + n)
    pg = (1.0 + ge1) / (1.0 + n)
    bad = ~np.isfinite(observed)
    p[bad] = np.nan
    pg[bad] = np.nan
    # overall statistics are one-sided by nature
    pg[-2:] = p[-2:]
    return p, pg


def _report(pattern, observed, Q, R, reps, config, null_model):
    q = pattern.q
    p, pg = _mc_pvalues(observed, reps, q)
    tails = _tail_value(reps, q, config.alternative)
    crit = np.array([order_statistic_critical(tails[:, k], config.alpha)
                     for k in range(tails.shape[1])])
    return McTestReport(
        names=statistic_names(q), observed=observed, p_mc=p, p_mc_greater=pg,
        critical_values=crit, null_model=null_model, n_mc=config.n_mc, seed=config.seed,
        alpha=config.alpha, Q=Q, R=R, class_sizes=tuple(int(s) for s in pattern.class_sizes),
        replicates=reps if config.keep_replicates else None,
    )


def randomization_test(pattern: MarkedPattern, config: McConfig) -> McTestReport:
    """Monte Carlo randomization of the labels on the fixed locations.

    ``Q`` and ``R`` depend only on the locations, so the moments are computed
    once and reused in every replication.
    """
    if config.null_model != RL_PERMUTATION:
        raise ValueError("randomization_test needs null_model='rl_permutation'")
    job, graph = _relabel_job(pattern, config.seed, verify_qr=config.verify_qr)
    # same arithmetic as the replications, so ties compare exactly
    observed = _label_stats(job, np.asarray(pattern.labels)[None, :])[0]
    reps = replicate_statistics(job, config.n_mc, config.workers)
    return _report(pattern, observed, graph.Q, graph.R, reps, config, RL_PERMUTATION)


def csr_mc_test(pattern: MarkedPattern, config: McConfig) -> McTestReport:
    """Monte Carlo test against CSR independence with the observed class sizes.

    Each replication draws fresh uniform locations in the region and
    recomputes ``Q``, ``R`` and the moments.
    """
    if config.null_model != CSR_SIMULATION:
        raise ValueError("csr_mc_test needs null_model='csr_simulation'")
    region = config.region or pattern.region
    observed, Q, R = pattern_statistics(pattern)
    job = _Job("csr", config.seed, pattern=pattern, region=region)
    reps = replicate_statistics(job, config.n_mc, config.workers)
    return _report(pattern, observed, Q, R, reps, config, CSR_SIMULATION)


def _freeze(spec, seed):
    if isinstance(spec, RlCase):
        return spec.freeze(aux_stream(seed, 0))
    return spec


def _spec_job(spec, seed, stream="rep", verify_qr=False):
    spec = _freeze(spec, seed)
    if isinstance(spec, RandomLabel):
        q = len(spec.class_sizes)
        # any starting labels will do; every replication permutes them
        base = np.repeat(np.arange(q), spec.class_sizes)
        pattern = MarkedPattern(spec.locations, base, default_class_names(q), spec.region)
        job, _ = _relabel_job(pattern, seed, stream=stream, verify_qr=verify_qr)
        return job, q
    return _Job("spec", seed, spec=spec, stream=stream), len(spec.class_sizes)


def mc_critical_values(null_spec, config: McConfig, names=None):
    """Monte Carlo critical values of every statistic under ``null_spec``.

    Returns a dict mapping statistic name to the ``ceil((1 - alpha) n_mc)``-th
    order statistic. Cell z-scores enter as ``|z|`` for two-sided tests.
    Replications use streams disjoint from :func:`rate_experiment`'s.
    """
    if config.n_mc < 100:
        raise ValueError("Monte Carlo critical values need n_mc >= 100")
    job, q = _spec_job(null_spec, config.seed, stream="crit")
    reps = replicate_statistics(job, config.n_mc, config.workers)
    tails = _tail_value(reps, q, config.alternative)
    all_names = statistic_names(q)
    wanted = all_names if names is None else list(names)
    out = {}
    for name in wanted:
        k = all_names.index(name)
        out[name] = order_statistic_critical(tails[:, k], config.alpha)
    return out


def proportion_thresholds(alpha, n_mc):
    """Bounds of the one-sided proportion tests at level ``alpha`` around ``alpha``.

    Empirical sizes below the lower bound are flagged conservative, above the
    upper bound liberal.
    """
    if alpha <= 0:
        return 0.0, 0.0
    half = special.ndtri(1 - alpha) * math.sqrt(alpha * (1 - alpha) / n_mc)
    return alpha - half, alpha + half


def _report_rows(q):
    names = statistic_names(q)
    if q == 2:
        keep = ["D(1,1)", "D(2,2)", "N(1,1)", "N(2,2)", "C_D", "C_N"]
    else:
        keep = names
    return [names.index(k) for k in keep]


@dataclass(frozen=True, eq=False)
class RateTable:
    """Rejection proportion per statistic with conservative/liberal flags."""

    names: list
    rates: np.ndarray
    flags: list
    n_mc: int
    alpha: float
    critical_source: str
    spec: str
    lower: float
    upper: float
    criticals: np.ndarray = field(default=None)

    def to_csv(self):
        lines = ["statistic,rate,flag"]
        for n, r, f in zip(self.names, self.rates, self.flags):
            lines.append(f"{n},{r:.6f},{f}")
        return "\n".join(lines) + "\n"

    def as_dict(self):
        return {n: float(r) for n, r in zip(self.names, self.rates)}

    def to_dict(self):
        return {
            "spec": self.spec, "n_mc": self.n_mc, "alpha": self.alpha,
            "critical_source": self.critical_source,
            "thresholds": {"conservative_below": self.lower, "liberal_above": self.upper},
            "rows": [{"statistic": n, "rate": float(r), "flag": f}
                     for n, r, f in zip(self.names, self.rates, self.flags)],
        }


def _flag(rate, lower, upper):
    if rate < lower:
        return "conservative"
    if rate > upper:
        return "liberal"
    return "ok"


def rate_experiment(spec, config: McConfig, critical_source="asymptotic", null_spec=None,
                    is_null=True):
    """Rejection rates of all tests on ``config.n_mc`` patterns drawn from ``spec``.

    Parameters
    ----------
    spec : process spec
        Null (for empirical size) or alternative (for power).
    critical_source : {"asymptotic", "monte_carlo"}
        Reject against normal/chi-square quantiles, or against
        :func:`mc_critical_values` simulated under ``null_spec``.
    null_spec : process spec, optional
        Defaults to CSR with ``spec``'s class sizes on the unit square.
    is_null : bool
        Whether ``spec`` is a null model. Conservative/liberal flags are
        only computed for nulls; power runs get ``"n/a"``.
    """
    job, q = _spec_job(spec, config.seed, verify_qr=config.verify_qr)
    reps = replicate_statistics(job, config.n_mc, config.workers)
    tails = _tail_value(reps, q, config.alternative)
    if critical_source == "asymptotic":
        crit = _asymptotic_criticals(q, config.alpha, config.alternative)
    elif critical_source == "monte_carlo":
        null_spec = null_spec if null_spec is not None else CsrUniform(tuple(spec.class_sizes))
        mc = mc_critical_values(null_spec, config)
        crit = np.array([mc[n] for n in statistic_names(q)])
    else:
        raise ValueError(f"unknown critical source {critical_source!r}")
    with np.errstate(invalid="ignore"):
        reject = tails >= crit[None, :]
    rates = reject.mean(axis=0)
    rows = _report_rows(q)
    lower, upper = proportion_thresholds(config.alpha, config.n_mc)
    names = statistic_names(q)
    try:
        text = format_spec(spec)
    except Exception:
        text = type(spec).__name__
    return RateTable(
        names=[names[k] for k in rows],
        rates=rates[rows],
        flags=[_flag(rates[k], lower, upper) if is_null else "n/a" for k in rows],
        n_mc=config.n_mc,
        alpha=config.alpha,
        critical_source=critical_source,
        spec=text,
        lower=lower,
        upper=upper,
        criticals=crit[rows],
    )
