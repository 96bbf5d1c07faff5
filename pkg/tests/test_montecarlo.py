import numpy as np
import pytest
from scipy import stats

from nnctseg import McConfig, csr_mc_test, generate, mc_critical_values, randomization_test
from nnctseg import rate_experiment
from nnctseg.generators import CsrUniform, RlCase, Segregation2
from nnctseg.montecarlo import (CSR_SIMULATION, order_statistic_critical, proportion_thresholds,
                                replicate_statistics, run_indexed, statistic_names, _spec_job)


def _square(i):
    return np.array([i, i * i], dtype=float)


def test_statistic_names():
    assert statistic_names(2) == ["D(1,1)", "D(1,2)", "D(2,1)", "D(2,2)", "N(1,1)", "N(1,2)",
                                  "N(2,1)", "N(2,2)", "C_D", "C_N"]


def test_run_indexed_order_and_workers():
    a = run_indexed(_square, 37, workers=1)
    b = run_indexed(_square, 37, workers=3)
    assert np.array_equal(a, b)
    assert a[:, 0].tolist() == list(range(37))


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(n_mc=0, seed=1)
    with pytest.raises(ValueError):
        McConfig(n_mc=10, seed=1, alpha=1.5)
    with pytest.raises(ValueError):
        McConfig(n_mc=10, seed=1, null_model="other")


def test_randomization_determinism():
    p = generate(CsrUniform((30, 30)), seed=1)
    cfg = McConfig(n_mc=200, seed=5)
    a, b = randomization_test(p, cfg), randomization_test(p, cfg)
    assert np.array_equal(a.p_mc, b.p_mc)
    assert a.to_dict() == b.to_dict()
    c = randomization_test(p, McConfig(n_mc=200, seed=5, workers=4))
    assert c.to_dict() == a.to_dict()


def test_randomization_observed_matches_analysis():
    from nnctseg import analyze, build_nn_graph, build_nnct

    p = generate(CsrUniform((20, 25, 15)), seed=3)
    g = build_nn_graph(p)
    rep = analyze(build_nnct(p, g), g.Q, g.R)
    r = randomization_test(p, McConfig(n_mc=50, seed=1))
    np.testing.assert_allclose(r.observed[:9], rep.dixon_cells.z.ravel(), rtol=1e-12)
    assert r.observed[-1] == pytest.approx(rep.new.statistic, rel=1e-12)
    assert (r.Q, r.R) == (g.Q, g.R)


def test_strong_segregation_rejected():
    p = generate(Segregation2(50, 50, 1 / 3), seed=2)
    r = randomization_test(p, McConfig(n_mc=1999, seed=1))
    assert r.p_mc[-2] <= 0.001 and r.p_mc[-1] <= 0.001
    c = csr_mc_test(p, McConfig(n_mc=999, seed=1, null_model=CSR_SIMULATION, workers=4))
    assert c.p_mc[-2] <= 0.001 and c.p_mc[-1] <= 0.001
    assert np.all((c.p_mc >= 0) & (c.p_mc <= 1))


def test_csr_mc_determinism_and_workers():
    p = generate(CsrUniform((20, 20)), seed=8)
    a = csr_mc_test(p, McConfig(n_mc=60, seed=2, null_model=CSR_SIMULATION))
    b = csr_mc_test(p, McConfig(n_mc=60, seed=2, null_model=CSR_SIMULATION, workers=3))
    assert np.array_equal(a.p_mc, b.p_mc)


def test_null_model_mismatch():
    p = generate(CsrUniform((5, 5)), seed=0)
    with pytest.raises(ValueError):
        csr_mc_test(p, McConfig(n_mc=10, seed=1))
    with pytest.raises(ValueError):
        randomization_test(p, McConfig(n_mc=10, seed=1, null_model=CSR_SIMULATION))


@pytest.mark.slow
def test_rl_pvalues_uniform_under_null():
    pvals = []
    for s in range(500):
        p = generate(CsrUniform((50, 50)), seed=1000 + s)
        pvals.append(randomization_test(p, McConfig(n_mc=199, seed=s)).p_mc)
    pvals = np.array(pvals)
    names = statistic_names(2)
    assert stats.kstest(pvals[:, names.index("C_D")], "uniform").statistic < 0.05
    # every statistic is valid: no excess of small p-values; lattice-valued
    # cell counts make some p-values conservative, which is allowed
    for k in range(pvals.shape[1]):
        u = np.sort(pvals[:, k])
        excess = np.max(np.arange(1, u.size + 1) / u.size - u)
        assert excess < 0.05, names[k]


def test_order_statistic_normal_quantile():
    x = np.random.default_rng(4).standard_normal(100_000)
    assert order_statistic_critical(x, 0.05) == pytest.approx(1.645, abs=0.02)


def test_order_statistic_edges():
    x = np.arange(1.0, 101.0)
    assert order_statistic_critical(x, 0.05) == 95.0
    # alpha below 1/n picks the largest value; alpha = 1 - 1/n the smallest
    assert order_statistic_critical(x, 0.001) == 100.0
    assert order_statistic_critical(x, 1 - 1 / 100) == 1.0
    assert order_statistic_critical(x, 0.0) == np.inf


def test_mc_critical_values_determinism():
    spec = CsrUniform((20, 20))
    a = mc_critical_values(spec, McConfig(n_mc=200, seed=3))
    b = mc_critical_values(spec, McConfig(n_mc=200, seed=3, workers=4))
    assert a == b
    assert set(a) == set(statistic_names(2))
    with pytest.raises(ValueError):
        mc_critical_values(spec, McConfig(n_mc=50, seed=3))


def test_mc_critical_values_rl_case():
    crit = mc_critical_values(RlCase(2, (20, 20)), McConfig(n_mc=200, seed=3),
                              names=["C_D", "C_N"])
    assert set(crit) == {"C_D", "C_N"} and all(np.isfinite(v) for v in crit.values())


def test_proportion_thresholds():
    lo, hi = proportion_thresholds(0.05, 10_000)
    assert lo == pytest.approx(0.0464, abs=5e-5)
    assert hi == pytest.approx(0.0536, abs=5e-5)


def test_alpha_zero_rejects_nothing():
    t = rate_experiment(CsrUniform((20, 20)), McConfig(n_mc=50, seed=1, alpha=0.0))
    assert np.all(t.rates == 0)


def test_rate_table_schema_and_workers():
    spec = CsrUniform((25, 25))
    a = rate_experiment(spec, McConfig(n_mc=100, seed=7))
    b = rate_experiment(spec, McConfig(n_mc=100, seed=7, workers=4))
    assert a.to_csv() == b.to_csv()
    lines = a.to_csv().splitlines()
    assert lines[0] == "statistic,rate,flag"
    assert [ln.rsplit(",", 2)[0] for ln in lines[1:]] == ["D(1,1)", "D(2,2)", "N(1,1)", "N(2,2)",
                                                      "C_D", "C_N"]
    assert all(0 <= r <= 1 for r in a.rates)
    assert set(a.flags) <= {"ok", "conservative", "liberal"}


def test_power_flags_and_mc_criticals():
    t = rate_experiment(Segregation2(30, 30, 1 / 6), McConfig(n_mc=100, seed=2),
                        critical_source="monte_carlo", is_null=False)
    assert set(t.flags) == {"n/a"}
    assert t.critical_source == "monte_carlo"
    with pytest.raises(ValueError):
        rate_experiment(Segregation2(30, 30, 1 / 6), McConfig(n_mc=10, seed=2),
                        critical_source="bogus")


def test_three_class_rows():
    t = rate_experiment(CsrUniform((15, 15, 15)), McConfig(n_mc=20, seed=2))
    assert len(t.names) == 2 * 9 + 2


def test_rl_replications_keep_q_and_r():
    job, _ = _spec_job(RlCase(1, (15, 15)), 3, verify_qr=True)
    reps = replicate_statistics(job, 30)
    assert reps.shape == (30, 10)
    t = rate_experiment(RlCase(1, (15, 15)), McConfig(n_mc=30, seed=3, verify_qr=True))
    assert len(t.rates) == 6


def test_keep_replicates():
    p = generate(CsrUniform((10, 10)), seed=0)
    r = randomization_test(p, McConfig(n_mc=20, seed=1, keep_replicates=True))
    assert r.replicates.shape == (20, 10)
    assert randomization_test(p, McConfig(n_mc=20, seed=1)).replicates is None


@pytest.mark.slow
def test_new_overall_beats_dixon_under_segregation():
    t = rate_experiment(Segregation2(50, 50, 1 / 4), McConfig(n_mc=1000, seed=20240601, workers=8),
                        is_null=False)
    r = dict(zip(t.names, t.rates))
    assert r["C_N"] > r["C_D"]
    assert r["C_N"] == pytest.approx(0.9935, abs=0.02)
    assert r["C_D"] == pytest.approx(0.9777, abs=0.02)
