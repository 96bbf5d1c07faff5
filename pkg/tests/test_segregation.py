import numpy as np
import pytest

from nnctseg import MarkedPattern, Nnct, analyze, build_nn_graph, build_nnct, rl_moments
from nnctseg.fixtures import load_fixture
from nnctseg.segregation import dixon_two_class, new_overall

from conftest import random_pattern

PIELOU = Nnct.from_counts([[137, 23], [38, 30]], ("D.F.", "P.P."))


@pytest.fixture(scope="module")
def pielou():
    return analyze(PIELOU, 162, 134)


@pytest.fixture(scope="module")
def swamp():
    table, spec = load_fixture("swamp")
    return analyze(table, spec["Q"], spec["R"])


def test_pielou_dixon(pielou):
    z = pielou.dixon_cells.z
    assert z[0, 0] == pytest.approx(4.36, abs=0.01)
    assert z[1, 1] == pytest.approx(2.29, abs=0.01)
    assert pielou.dixon_cells.p_two_sided[1, 1] == pytest.approx(0.0221, abs=5e-4)
    assert pielou.dixon.statistic == pytest.approx(19.67, abs=0.02)
    assert pielou.dixon.df == 2
    assert pielou.dixon.p == pytest.approx(0.0001, abs=0.0001)


def test_pielou_new_cells(pielou):
    z = pielou.new_cells.z
    assert z[0, 0] == pytest.approx(3.63, abs=0.01)
    assert z[0, 1] == pytest.approx(-3.61, abs=0.01)
    assert z[1, 0] == pytest.approx(-3.63, abs=0.01)
    assert pielou.new.df == 1
    assert pielou.new.p == pytest.approx(0.0003, abs=0.0001)


def test_swamp_spot_cells(swamp):
    cls = swamp.table.classes
    zd, zn = swamp.dixon_cells.z, swamp.new_cells.z
    for name, d, nw in [("W.T.", 6.39, 7.55), ("B.G.", 8.05, 8.16), ("O.T.", 10.77, 10.71)]:
        k = cls.index(name)
        assert zd[k, k] == pytest.approx(d, abs=0.02)
        assert zn[k, k] == pytest.approx(nw, abs=0.02)
    assert swamp.dixon.statistic == pytest.approx(275.64, abs=0.05)
    assert swamp.dixon.df == 20 and swamp.new.df == 16


def test_two_class_symmetries(rng):
    for _ in range(20):
        p = random_pattern(rng, (int(rng.integers(5, 40)), int(rng.integers(5, 40))))
        g = build_nn_graph(p)
        r = analyze(build_nnct(p, g), g.Q, g.R)
        zd, zn = r.dixon_cells.z, r.new_cells.z
        assert zd[0, 0] == pytest.approx(-zd[0, 1], abs=1e-12)
        assert zd[1, 0] == pytest.approx(-zd[1, 1], abs=1e-12)
        assert zn[0, 0] == pytest.approx(-zn[1, 0], abs=1e-12)
        assert zn[0, 1] == pytest.approx(-zn[1, 1], abs=1e-12)
        assert len(np.unique(np.round(np.abs(zd), 9))) <= 2
        assert len(np.unique(np.round(np.abs(zn), 9))) <= 2


def test_two_class_closed_forms(rng):
    for _ in range(25):
        n1, n2 = (int(v) for v in rng.integers(5, 60, 2))
        g = build_nn_graph(rng.random((n1 + n2, 2)))
        Q, R = g.Q, g.R
        a = int(rng.integers(0, n1 + 1))
        b = int(rng.integers(0, n2 + 1))
        table = Nnct.from_counts([[a, n1 - a], [n2 - b, b]])
        m = rl_moments((n1, n2), Q, R)
        inv, corr = dixon_two_class(table, m.cell)
        cd = analyze(table, Q, R, m).dixon.statistic
        assert inv == pytest.approx(cd, rel=1e-8, abs=1e-8)
        assert corr == pytest.approx(cd, rel=1e-8, abs=1e-8)


def test_new_overall_zero_at_expectation():
    sizes = (12, 15, 9)
    m = rl_moments(sizes, 24, 20)
    table = Nnct.from_counts(m.expected)
    assert new_overall(table, m.t).statistic == pytest.approx(0.0, abs=1e-10)
    assert analyze(table, 24, 20).dixon.statistic == pytest.approx(0.0, abs=1e-10)


def test_class_order_invariance(swamp):
    order = [3, 1, 4, 0, 2]
    r = analyze(swamp.table.permuted(order), swamp.Q, swamp.R)
    assert r.dixon.statistic == pytest.approx(swamp.dixon.statistic, rel=1e-9)
    assert r.new.statistic == pytest.approx(swamp.new.statistic, rel=1e-9)
    np.testing.assert_allclose(r.dixon_cells.z, swamp.dixon_cells.z[np.ix_(order, order)],
                               rtol=1e-9)


def test_similarity_invariance_of_statistics(rng):
    p = random_pattern(rng, (20, 25, 15))
    g = build_nn_graph(p)
    base = analyze(build_nnct(p, g), g.Q, g.R)
    th = 0.7
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    moved = MarkedPattern.from_labels(3.5 * p.points @ rot.T + 10, p.label_tokens)
    g2 = build_nn_graph(moved)
    r = analyze(build_nnct(moved, g2), g2.Q, g2.R)
    np.testing.assert_array_equal(r.table.counts, base.table.counts)
    assert r.new.statistic == base.new.statistic
    assert r.dixon.statistic == base.dixon.statistic


def test_pvalue_ranges_and_tags(pielou):
    for cells in (pielou.dixon_cells, pielou.new_cells):
        assert np.all((cells.p_two_sided >= 0) & (cells.p_two_sided <= 1))
        assert np.all((cells.p_one_sided_greater >= 0) & (cells.p_one_sided_greater <= 1))
    tags = pielou.dixon_cells.tags()
    assert tags[0, 0] == "segregation" and tags[1, 1] == "segregation"
    assert tags[0, 1] == "lack of association"


def test_undefined_cells_are_marked():
    # with a single point in a class the same-class cell count is always 0
    r = analyze(Nnct.from_counts([[0, 1], [1, 8]]), 2, 2)
    assert r.dixon_cells.undefined[0, 0]
    assert np.isnan(r.dixon_cells.z[0, 0])
    assert np.isfinite(r.dixon.statistic)


def test_report_dict_carries_inputs(pielou):
    d = pielou.to_dict()
    assert d["Q"] == 162 and d["R"] == 134 and d["class_sizes"] == [160, 68]
    assert "inappropriate" in d["pielou"]["note"]
