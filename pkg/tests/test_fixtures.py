import pytest

from nnctseg import run_fixture
from nnctseg.fixtures import FixtureError, available_fixtures, load_fixture


def test_available():
    assert available_fixtures() == ["pielou", "swamp"]


def test_swamp_fixture_passes():
    res = run_fixture("swamp")
    assert res.passed, res.describe()
    assert res.checked >= 10


def test_pielou_fixture_passes():
    res = run_fixture("pielou")
    print(res.describe())
    assert res.passed, res.describe()


def test_perturbed_table_fails_with_diff():
    res = run_fixture("swamp", perturb=[[5, -5, 0, 0, 0]] + [[0] * 5] * 4)
    assert not res.passed
    assert any("C_D" in d for d in res.diffs)
    assert "FAIL" in res.describe()


def test_fixture_is_not_mutated():
    a, _ = load_fixture("pielou")
    run_fixture("pielou", perturb=[[1, 0], [0, 1]])
    b, _ = load_fixture("pielou")
    assert (a.counts == b.counts).all()


def test_missing_fixture():
    with pytest.raises(FixtureError):
        run_fixture("nope")
