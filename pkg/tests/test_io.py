import numpy as np
import pytest

from nnctseg import DataError, build_nn_graph, build_nnct, read_pattern_csv, read_table_csv
from nnctseg.geometry import DuplicatePointError
from nnctseg.io import format_pattern_csv, format_table_csv, jitter_pattern, parse_table_text


def test_two_row_round_trip(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("x,y,class\n0.25,0.5,a\n1.0,2.0,b\n")
    p = read_pattern_csv(f)
    assert p.n == 2 and p.classes == ("a", "b")
    assert p.region.xmin == 0.25 and p.region.ymax == 2.0
    out = tmp_path / "q.csv"
    out.write_text(format_pattern_csv(p))
    assert np.array_equal(read_pattern_csv(out).points, p.points)
    assert out.read_text() == f.read_text()


def test_bad_row_reports_line(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("x,y,class\n0,0,a\n1,zz,b\n2,2,a\n")
    with pytest.raises(DataError, match=r":3:"):
        read_pattern_csv(f)
    f.write_text("x,y,class\n0,0,a\n1,1\n")
    with pytest.raises(DataError, match=r":3:"):
        read_pattern_csv(f)
    f.write_text("x,y\n0,0\n")
    with pytest.raises(DataError, match=r":1:"):
        read_pattern_csv(f)
    f.write_text("x,y,class\n0,0,a\n")
    with pytest.raises(DataError):
        read_pattern_csv(f)


def test_duplicates_and_jitter(tmp_path):
    f = tmp_path / "dup.csv"
    f.write_text("x,y,class\n0,0,a\n0,0,b\n1,1,a\n")
    p = read_pattern_csv(f)
    with pytest.raises(DuplicatePointError):
        build_nn_graph(p)
    j = jitter_pattern(p, np.random.default_rng(0))
    assert np.max(np.abs(j.points - p.points)) <= 1e-9
    assert build_nn_graph(j).n == 3


def test_five_class_table(tmp_path):
    # a 5 x 2 grid with classes by column: nearest neighbors are vertical
    rows = ["x,y,class"]
    for c in range(5):
        for r in range(2):
            rows.append(f"{3.0 * c},{float(r)},k{c}")
    f = tmp_path / "five.csv"
    f.write_text("\n".join(rows) + "\n")
    p = read_pattern_csv(f)
    assert p.classes == ("k0", "k1", "k2", "k3", "k4")
    t = build_nnct(p, build_nn_graph(p))
    assert np.array_equal(t.counts, 2 * np.eye(5, dtype=int))


def test_region_option(tmp_path):
    from nnctseg import StudyRegion

    f = tmp_path / "p.csv"
    f.write_text("x,y,class\n0.2,0.2,a\n0.8,0.8,b\n")
    p = read_pattern_csv(f, region=StudyRegion.unit())
    assert p.region.area == 1.0
    with pytest.raises(DataError):
        read_pattern_csv(f, region=StudyRegion(0, 0.5, 0, 0.5))


def test_table_round_trip_and_errors(tmp_path):
    text = "class,D.F.,P.P.\nD.F.,137,23\nP.P.,38,30\n"
    t = parse_table_text(text)
    assert t.classes == ("D.F.", "P.P.")
    assert format_table_csv(t) == text
    f = tmp_path / "t.csv"
    f.write_text(text)
    assert np.array_equal(read_table_csv(f).counts, [[137, 23], [38, 30]])
    for bad, line in (("class,a,b\na,1,2\nb,3\n", ":3:"), ("class,a,b\na,1,x\nb,3,4\n", ":2:"),
                      ("class,a,b\nb,1,2\na,3,4\n", ":2:"), ("class,a,b\na,1,-2\nb,3,4\n", ":2:")):
        with pytest.raises(DataError, match=line):
            parse_table_text(bad)
    with pytest.raises(DataError):
        parse_table_text("class,a,b\na,1,2\n")
