"""Plain-text formats: marked patterns and contingency tables as CSV.

Pattern files have the header ``x,y,class``; the class column may hold any
token without commas. Table files look like::

    class,D.F.,P.P.
    D.F.,137,23
    P.P.,38,30

with rows and columns in the same class order.
"""

import csv
import io as _io

import numpy as np

from .geometry import MarkedPattern, StudyRegion
from .table import Nnct

__all__ = [
    "DataError",
    "read_pattern_csv",
    "parse_pattern_text",
    "format_pattern_csv",
    "write_pattern_csv",
    "read_table_csv",
    "parse_table_text",
    "format_table_csv",
    "jitter_pattern",
]

JITTER = 1e-9


class DataError(ValueError):
    """Malformed input file; the message names the offending 1-based line."""


def _rows(text):
    return list(csv.reader(_io.StringIO(text)))


def parse_pattern_text(text, region=None, classes=None, source="<input>"):
    rows = _rows(text)
    if not rows:
        raise DataError(f"{source}: empty file")
    header = [h.strip() for h in rows[0]]
    if header != ["x", "y", "class"]:
        raise DataError(f"{source}:1: header must be 'x,y,class', got {','.join(rows[0])!r}")
    pts, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise DataError(f"{source}:{lineno}: expected 3 fields, got {len(row)}")
        try:
            x, y = float(row[0]), float(row[1])
        except ValueError:
            raise DataError(f"{source}:{lineno}: non-numeric coordinate in {','.join(row)!r}") from None
        if not (np.isfinite(x) and np.isfinite(y)):
            raise DataError(f"{source}:{lineno}: coordinates must be finite")
        token = row[2].strip()
        if not token:
            raise DataError(f"{source}:{lineno}: empty class label")
        pts.append((x, y))
        labels.append(token)
    if len(pts) < 2:
        raise DataError(f"{source}: need at least 2 points, got {len(pts)}")
    pts = np.array(pts, dtype=float)
    if region is None:
        region = StudyRegion.bounding(pts)
    elif not np.all(region.contains(pts)):
        raise DataError(f"{source}: some points fall outside the given region")
    return MarkedPattern.from_labels(pts, labels, classes=classes, region=region)


def read_pattern_csv(path, region=None, classes=None):
    """Read a pattern file; classes are ordered by first appearance unless ``classes`` is given."""
    with open(path, newline="") as fh:
        return parse_pattern_text(fh.read(), region=region, classes=classes, source=str(path))


def format_pattern_csv(pattern: MarkedPattern):
    lines = ["x,y,class"]
    for (x, y), lab in zip(pattern.points, pattern.label_tokens):
        lines.append(f"{float(x)!r},{float(y)!r},{lab}")
    return "\n".join(lines) + "\n"


def write_pattern_csv(pattern, path):
    with open(path, "w", newline="") as fh:
        fh.write(format_pattern_csv(pattern))


def jitter_pattern(pattern: MarkedPattern, rng, scale=JITTER):
    """Shift every coordinate by an independent uniform amount in ``[-scale, scale]``."""
    pts = pattern.points + rng.uniform(-scale, scale, pattern.points.shape)
    g = pattern.region
    region = StudyRegion(min(g.xmin, pts[:, 0].min()), max(g.xmax, pts[:, 0].max()),
                         min(g.ymin, pts[:, 1].min()), max(g.ymax, pts[:, 1].max()))
    return MarkedPattern(pts, pattern.labels, pattern.classes, region)


def parse_table_text(text, source="<input>"):
    rows = [r for r in _rows(text) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{source}: empty file")
    header = [h.strip() for h in rows[0]]
    classes = header[1:]
    q = len(classes)
    if q < 1:
        raise DataError(f"{source}:1: header needs at least one class column")
    if len(rows) - 1 != q:
        raise DataError(f"{source}: expected {q} table rows, got {len(rows) - 1}")
    counts = np.zeros((q, q), dtype=np.int64)
    for k, row in enumerate(rows[1:]):
        lineno = k + 2
        if len(row) != q + 1:
            raise DataError(f"{source}:{lineno}: expected {q + 1} fields, got {len(row)}")
        if row[0].strip() != classes[k]:
            raise DataError(f"{source}:{lineno}: row label {row[0].strip()!r} should be {classes[k]!r}")
        for j, cell in enumerate(row[1:]):
            try:
                v = int(cell)
            except ValueError:
                raise DataError(f"{source}:{lineno}: count {cell!r} is not an integer") from None
            if v < 0:
                raise DataError(f"{source}:{lineno}: negative count")
            counts[k, j] = v
    try:
        return Nnct(counts, tuple(classes))
    except ValueError as exc:
        raise DataError(f"{source}: {exc}") from None


def read_table_csv(path):
    with open(path, newline="") as fh:
        return parse_table_text(fh.read(), source=str(path))


def format_table_csv(table: Nnct):
    lines = [",".join(["class"] + [str(c) for c in table.classes])]
    for c, row in zip(table.classes, table.counts):
        lines.append(",".join([str(c)] + [str(int(v)) if table.is_integral else repr(float(v))
                                          for v in row]))
    return "\n".join(lines) + "\n"
