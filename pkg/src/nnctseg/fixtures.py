"""Checked-in reference tables and their expected test results.

Each fixture is a table CSV plus a JSON file listing expected values at
published precision with an explicit tolerance per value. Keys look like
``dixon_z:W.T.,B.G.``, ``new_p:D.F.,P.P.``, ``C_D`` or ``p:C_N``. An entry
with ``max`` instead of ``value`` is an upper bound (used for ``p < .0001``).
"""

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .io import parse_table_text
from .segregation import TestReport, analyze

__all__ = ["FixtureError", "FixtureResult", "available_fixtures", "load_fixture",
           "report_values", "check_report", "run_fixture"]


class FixtureError(LookupError):
    """Unknown fixture name."""


@dataclass
class FixtureResult:
    name: str
    checked: int
    diffs: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.diffs

    def describe(self):
        head = f"fixture {self.name}: {'pass' if self.passed else 'FAIL'} ({self.checked} values)"
        return "\n".join([head] + [f"  {d}" for d in self.diffs])


def _data():
    return resources.files("nnctseg") / "data"


def available_fixtures():
    return sorted(p.name[:-5] for p in _data().iterdir() if p.name.endswith(".json"))


def load_fixture(name):
    """Return ``(table, spec)`` where ``spec`` is the parsed expectation JSON."""
    path = _data() / f"{name}.json"
    if not path.is_file():
        raise FixtureError(f"no fixture named {name!r}; available: {available_fixtures()}")
    spec = json.loads(path.read_text())
    table = parse_table_text((_data() / spec["table"]).read_text(), source=spec["table"])
    return table, spec


def report_values(report: TestReport):
    """Flatten a report into the key space used by fixtures."""
    out = {"C_D": report.dixon.statistic, "C_N": report.new.statistic,
           "p:C_D": report.dixon.p, "p:C_N": report.new.p}
    cls = report.table.classes
    for kind, cells in (("dixon", report.dixon_cells), ("new", report.new_cells)):
        for i, a in enumerate(cls):
            for j, b in enumerate(cls):
                out[f"{kind}_z:{a},{b}"] = float(cells.z[i, j])
                out[f"{kind}_p:{a},{b}"] = float(cells.p_two_sided[i, j])
    return out


def check_report(report: TestReport, spec, name="report"):
    values = report_values(report)
    diffs = []
    for entry in spec["values"]:
        key = entry["key"]
        got = values.get(key)
        if got is None:
            diffs.append(f"{key}: missing from report")
            continue
        if not np.isfinite(got):
            diffs.append(f"{key}: undefined")
        elif "max" in entry:
            if not got <= entry["max"]:
                diffs.append(f"{key}: got {got:.6g}, expected <= {entry['max']}")
        elif abs(got - entry["value"]) > entry["tol"]:
            diffs.append(f"{key}: got {got:.6g}, expected {entry['value']} +/- {entry['tol']} "
                         f"(off by {abs(got - entry['value']):.4g})")
    return FixtureResult(name, len(spec["values"]), diffs)


def run_fixture(name, perturb=None):
    """Analyze a fixture table and compare against its expectations.

    ``perturb`` (a ``q x q`` integer array) is added to the counts first,
    which gives a negative control.
    """
    table, spec = load_fixture(name)
    if perturb is not None:
        from .table import Nnct

        table = Nnct(table.counts + np.asarray(perturb, dtype=np.int64), table.classes)
    report = analyze(table, spec["Q"], spec["R"])
    return check_report(report, spec, name)
