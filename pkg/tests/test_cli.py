import json
from importlib import resources

import pytest

from nnctseg.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, REPORT_SCHEMA, main

PIELOU = str(resources.files("nnctseg") / "data" / "pielou.csv")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def pattern_file(tmp_path, capsys):
    f = tmp_path / "p.csv"
    assert main(["gen", "--spec", "seg2 n=40,40 s=1/6", "--seed", "3", "--out", str(f)]) == 0
    capsys.readouterr()
    return f


def test_table_mode_json(capsys):
    code, out, _ = run(capsys, "test", "--table", PIELOU, "--q", "162", "--r", "134")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["schema"] == REPORT_SCHEMA
    assert doc["Q"] == 162 and doc["R"] == 134
    assert doc["dixon_overall"]["statistic"] == pytest.approx(19.67, abs=0.02)
    assert doc["new_overall"]["statistic"] == pytest.approx(13.11, abs=0.02)


def test_table_mode_text_layout(capsys):
    code, out, _ = run(capsys, "test", "--table", PIELOU, "--q", "162", "--r", "134",
                       "--format", "text")
    assert code == EXIT_OK
    assert "19.67 (<.0001)" in out
    assert "4.36" in out and "Overall tests" in out


def test_table_mode_csv(capsys):
    code, out, _ = run(capsys, "test", "--table", PIELOU, "--q", "162", "--r", "134",
                       "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "statistic,value,p_asy"
    assert lines[-2].startswith("C_D,") and lines[-1].startswith("C_N,")
    assert len(lines) == 1 + 4 + 4 + 2


def test_table_mode_rejects_mc_and_bad_sizes(capsys):
    assert run(capsys, "test", "--table", PIELOU, "--q", "162", "--r", "134", "--nmc", "10",
               "--seed", "1")[0] == EXIT_USAGE
    assert run(capsys, "test", "--table", PIELOU, "--q", "162", "--r", "134",
               "--sizes", "100,128")[0] == EXIT_DATA
    assert run(capsys, "test", "--table", PIELOU, "--q", "162", "--r", "134",
               "--sizes", "160,68")[0] == EXIT_OK


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for f in (a, b):
        assert main(["gen", "--spec", "seg2 s=1/6 n=50,50", "--seed", "7", "--out", str(f)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "x,y,class"
    assert len(a.read_text().splitlines()) == 101
    capsys.readouterr()


def test_input_mode_with_mc(pattern_file, capsys):
    code, out, _ = run(capsys, "test", "--input", str(pattern_file), "--nmc", "99", "--seed", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["monte_carlo"]["n_mc"] == 99
    assert doc["inputs"]["seed"] == 2
    code, out, _ = run(capsys, "test", "--input", str(pattern_file), "--nmc", "99", "--seed", "2",
                       "--format", "csv")
    assert out.splitlines()[0] == "statistic,value,p_asy,p_mc"


def test_size_rows(capsys):
    code, out, _ = run(capsys, "size", "--spec", "csr n=50,50", "--nmc", "200", "--seed", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "statistic,rate,flag" and len(lines) == 7


def test_exit_codes(tmp_path, capsys):
    assert run(capsys)[0] == EXIT_USAGE
    assert run(capsys, "bogus")[0] == EXIT_USAGE
    assert run(capsys, "size", "--spec", "csr n=5,5", "--nmc", "10")[0] == EXIT_USAGE
    assert run(capsys, "gen", "--spec", "nonsense n=1", "--seed", "1")[0] == EXIT_DATA
    assert run(capsys, "test", "--input", str(tmp_path / "missing.csv"))[0] == EXIT_DATA
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y,class\n0,0,a\n1,q,b\n")
    code, _, err = run(capsys, "test", "--input", str(bad))
    assert code == EXIT_DATA and ":3:" in err
    dup = tmp_path / "dup.csv"
    dup.write_text("x,y,class\n0,0,a\n0,0,b\n1,1,a\n2,0,b\n")
    assert run(capsys, "test", "--input", str(dup))[0] == EXIT_DATA
    assert run(capsys, "test", "--input", str(dup), "--jitter")[0] == EXIT_OK
    assert run(capsys, "test", "--input", str(dup), "--workers", "0")[0] == EXIT_USAGE
    assert run(capsys, "--version")[0] == EXIT_OK
    assert run(capsys, "fixture", "swamp")[0] == EXIT_OK
    assert run(capsys, "fixture", "nope")[0] == EXIT_DATA


def test_numeric_exit_code(tmp_path, capsys):
    f = tmp_path / "t.csv"
    f.write_text("class,a,b\na,1,1\nb,1,1\n")
    assert run(capsys, "test", "--table", str(f), "--q", "20", "--r", "0")[0] in (EXIT_DATA,
                                                                                 EXIT_NUMERIC)


def test_second_order_commands(pattern_file, capsys):
    code, out, _ = run(capsys, "kfun", "--input", str(pattern_file), "--steps", "11")
    assert code == 0 and out.splitlines()[0] == "t,value" and len(out.splitlines()) == 12
    code, out, _ = run(capsys, "kfun", "--input", str(pattern_file), "--bivariate",
                       "--transform", "k", "--steps", "11")
    assert code == 0
    code, out, _ = run(capsys, "pcf", "--input", str(pattern_file))
    assert code == 0
    code, out, _ = run(capsys, "envelope", "--input", str(pattern_file), "--nsim", "39",
                       "--level", "1", "--seed", "1", "--steps", "11")
    assert code == 0 and out.splitlines()[0] == "t,value,lower,upper"


@pytest.mark.parametrize("argv", [
    ["size", "--spec", "csr n=20,20", "--nmc", "60", "--seed", "1"],
    ["power", "--spec", "seg2 n=20,20 s=1/6", "--nmc", "100", "--seed", "1", "--criticals", "mc",
     "--format", "json"],
    ["envelope", "--spec", "csr n=30,30", "--statistic", "k_biv", "--nsim", "40",
     "--seed", "1", "--steps", "11"],
])
def test_worker_invariance(argv, capsys):
    outs = []
    for w in ("1", "4"):
        assert main(argv + ["--workers", w]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_workers_env_default(monkeypatch, capsys):
    monkeypatch.setenv("NNCT_WORKERS", "2")
    assert run(capsys, "size", "--spec", "csr n=10,10", "--nmc", "20", "--seed", "1")[0] == 0
    monkeypatch.setenv("NNCT_WORKERS", "zero")
    assert run(capsys, "size", "--spec", "csr n=10,10", "--nmc", "20", "--seed", "1")[0] == \
        EXIT_USAGE
