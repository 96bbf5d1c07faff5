"""Command-line interface: ``nnctseg <command> ...``.

Commands
--------
test      NNCT tests on a pattern file (``--input``) or a table (``--table``)
gen       sample a pattern from a process spec
size      empirical size of every test under a null spec
power     empirical power under an alternative spec
kfun      Ripley K / L / L - t as CSV
pcf       pair correlation function as CSV
envelope  pointwise simulation envelope as CSV
fixture   check a bundled reference table against its expected results

Exit status is 0 on success, 1 on usage errors, 2 on data errors and 3 on
numerical failures. Diagnostics go to stderr.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .fixtures import FixtureError, available_fixtures, run_fixture
from .generators import CsrUniform, SpecError, SupremumViolation, generate, parse_spec
from .geometry import DuplicatePointError, StudyRegion, build_nn_graph
from .io import DataError, format_pattern_csv, jitter_pattern, read_pattern_csv, read_table_csv
from .moments import NegativeVarianceError
from .montecarlo import (CSR_SIMULATION, RL_PERMUTATION, McConfig, csr_mc_test,
                         default_workers, randomization_test, rate_experiment)
from .numerics import NonSymmetricMatrixError, aux_stream
from .secondorder import (STATISTICS, DistanceGrid, default_grid, envelope, k_bivariate,
                          k_univariate, pcf)
from .segregation import analyze
from .table import build_nnct

__all__ = ["main", "parse_pattern_csv", "REPORT_SCHEMA", "EXIT_OK", "EXIT_USAGE", "EXIT_DATA",
           "EXIT_NUMERIC"]

REPORT_SCHEMA = "nnctseg.report/1"
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

SPEC_HELP = """process specs are '<kind> key=value ...', for example
  csr n=50,50                      rl n=100,100 case=2
  seg2 n=100,100 s=1/6             seg3 n=50,50,50 s=1/12
  assoc2 n=30,50 r=1/10            assoc3 n=50,50,50 ry=1/7 rz=1/10
  pcp2 n=50,50 np=5 sigma=0.05 parents=shared
  matern n=50,50 kappa=5 radius=0.05 parents=different size=fixed
  ipcp n=50,50 f=sqrt_sum,abs_diff
fractions such as 1/6 are accepted for reals"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_pattern_csv(path, region=None, classes=None):
    """Read a ``x,y,class`` pattern file; see :func:`nnctseg.io.read_pattern_csv`."""
    return read_pattern_csv(path, region=region, classes=classes)


# ------------------------------------------------------------------ helpers


def _region(text):
    if text is None:
        return None
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--region must be xmin,xmax,ymin,ymax, got {text!r}") from None
    if len(vals) != 4:
        raise UsageError(f"--region must be xmin,xmax,ymin,ymax, got {text!r}")
    return StudyRegion(*vals)


def _workers(value):
    if value is not None:
        return value
    try:
        return default_workers()
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _need_seed(args):
    if args.seed is None:
        raise UsageError(f"{args.command}: --seed is required")


def _spec(text):
    return parse_spec(text)


def _load_pattern(args):
    pattern = parse_pattern_csv(args.input, region=_region(args.region))
    if getattr(args, "jitter", False):
        pattern = jitter_pattern(pattern, aux_stream(args.seed or 0, 1))
    return pattern


def _grid(args, region):
    if args.tmax is None:
        return default_grid(region, args.steps)
    if args.tmax <= 0:
        raise UsageError("--tmax must be positive")
    return DistanceGrid(np.linspace(0.0, args.tmax, args.steps))


def _emit(text, out=None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _fmt_p(p):
    if p is None or not np.isfinite(p):
        return "n/a"
    if p < 1e-4:
        return "<.0001"
    s = f"{p:.4f}"
    return s[1:] if s.startswith("0") else s


def _fmt_z(z):
    return "n/a" if not np.isfinite(z) else f"{z:.2f}"


# ------------------------------------------------------------------- test


def _test_inputs(args):
    out = {"mode": "table" if args.table else "pattern",
           "source": args.table or args.input,
           "null": args.null, "nmc": args.nmc, "seed": args.seed, "alpha": args.alpha}
    if args.table:
        out.update(Q=args.q, R=args.r)
    else:
        out.update(region=args.region, jitter=bool(args.jitter))
    return out


def _run_test(args):
    if args.nmc < 0:
        raise UsageError("--nmc must be nonnegative")
    if args.nmc and args.seed is None:
        raise UsageError("test: --seed is required when --nmc > 0")
    mc = None
    if args.table:
        if args.input:
            raise UsageError("test: give either --input or --table")
        if args.q is None or args.r is None:
            raise UsageError("test: --table needs --q and --r")
        if args.nmc:
            raise UsageError("test: Monte Carlo p-values need point locations (--input)")
        table = read_table_csv(args.table)
        if args.sizes is not None:
            sizes = [int(s) for s in args.sizes.split(",")]
            if sizes != table.class_sizes().tolist():
                raise DataError(f"--sizes {sizes} disagree with table row sums "
                                f"{table.class_sizes().tolist()}")
        report = analyze(table, args.q, args.r)
    else:
        if not args.input:
            raise UsageError("test: --input or --table is required")
        if args.q is not None or args.r is not None:
            raise UsageError("test: --q/--r apply to --table only")
        pattern = _load_pattern(args)
        graph = build_nn_graph(pattern)
        table = build_nnct(pattern, graph)
        report = analyze(table, graph.Q, graph.R)
        if args.nmc:
            model = RL_PERMUTATION if args.null == "rl" else CSR_SIMULATION
            cfg = McConfig(n_mc=args.nmc, seed=args.seed, alpha=args.alpha, null_model=model,
                           workers=_workers(args.workers))
            run = randomization_test if args.null == "rl" else csr_mc_test
            mc = run(pattern, cfg)
    doc = {"schema": REPORT_SCHEMA, "tool": "nnctseg", "version": __version__,
           "inputs": _test_inputs(args), **report.to_dict()}
    if mc is not None:
        doc["monte_carlo"] = mc.to_dict()
    if args.format == "json":
        text = json.dumps(_clean(doc), indent=2, sort_keys=False) + "\n"
    elif args.format == "csv":
        text = _report_csv(report, mc)
    else:
        text = _report_text(report, mc)
    _emit(text, args.out)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def _stat_rows(report):
    cls = report.table.classes
    rows = []
    for tag, cells in (("D", report.dixon_cells), ("N", report.new_cells)):
        for i, a in enumerate(cls):
            for j, b in enumerate(cls):
                rows.append((f"{tag}({a},{b})", cells.z[i, j], cells.p_two_sided[i, j]))
    rows.append(("C_D", report.dixon.statistic, report.dixon.p))
    rows.append(("C_N", report.new.statistic, report.new.p))
    return rows


def _report_csv(report, mc):
    head = "statistic,value,p_asy" + (",p_mc" if mc is not None else "")
    lines = [head]
    for k, (name, v, p) in enumerate(_stat_rows(report)):
        cells = [name, repr(float(v)) if np.isfinite(v) else "",
                 repr(float(p)) if np.isfinite(p) else ""]
        if mc is not None:
            pm = mc.p_mc[k]
            cells.append(repr(float(pm)) if np.isfinite(pm) else "")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _grid_text(classes, cell):
    q = len(classes)
    body = [[cell(i, j) for j in range(q)] for i in range(q)]
    width = max(8, *(len(str(c)) + 2 for c in classes))
    colw = 2 + max(len(s) for s in [str(c) for c in classes] + [s for r in body for s in r])
    lines = [" " * width + "".join(f"{str(c):>{colw}}" for c in classes)]
    for a, row in zip(classes, body):
        lines.append(f"{str(a):<{width}}" + "".join(f"{s:>{colw}}" for s in row))
    return lines


def _report_text(report, mc):
    cls = report.table.classes
    t = report.table
    lines = [f"NNCT  n={t.n}  Q={report.Q}  R={report.R}"]
    lines += _grid_text(cls, lambda i, j: str(int(t.counts[i, j])))
    lines.append("")
    pm = None if mc is None else dict(zip(mc.names, mc.p_mc))

    def cell(cells, tag):
        def f(i, j):
            s = f"{_fmt_z(cells.z[i, j])} ({_fmt_p(cells.p_two_sided[i, j])})"
            if pm is not None:
                s = f"{s} [{_fmt_p(pm[f'{tag}({i + 1},{j + 1})'])}]"
            return s
        return f

    lines.append("Dixon's cell-specific tests: z (p_asy)" + (" [p_mc]" if pm else ""))
    lines += _grid_text(cls, cell(report.dixon_cells, "D"))
    lines.append("")
    lines.append("New cell-specific tests: z (p_asy)" + (" [p_mc]" if pm else ""))
    lines += _grid_text(cls, cell(report.new_cells, "N"))
    lines.append("")
    lines.append("Overall tests")
    for name, test in (("C_D", report.dixon), ("C_N", report.new)):
        s = f"  {name} = {test.statistic:.2f} ({_fmt_p(test.p)})  df={test.df}"
        if pm is not None:
            s += f"  p_mc={_fmt_p(pm[name])}"
        lines.append(s)
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ other commands


def _run_gen(args):
    _need_seed(args)
    spec = _spec(args.spec)
    pattern = generate(spec, seed=args.seed)
    _emit(format_pattern_csv(pattern), args.out)
    g = pattern.region
    print(f"region {g.xmin!r},{g.xmax!r},{g.ymin!r},{g.ymax!r}", file=sys.stderr)


def _run_rates(args):
    _need_seed(args)
    if args.nmc < 1:
        raise UsageError(f"{args.command}: --nmc must be positive")
    spec = _spec(args.spec)
    null_spec = _spec(args.null_spec) if args.null_spec else None
    cfg = McConfig(n_mc=args.nmc, seed=args.seed, alpha=args.alpha,
                   workers=_workers(args.workers))
    source = "asymptotic" if args.criticals == "asy" else "monte_carlo"
    table = rate_experiment(spec, cfg, critical_source=source, null_spec=null_spec,
                            is_null=args.command == "size")
    if args.format == "json":
        doc = {"schema": REPORT_SCHEMA, "tool": "nnctseg", "version": __version__,
               "command": args.command, "seed": args.seed, **table.to_dict()}
        if null_spec is not None:
            doc["null_spec"] = args.null_spec
        text = json.dumps(_clean(doc), indent=2) + "\n"
    else:
        text = table.to_csv()
    _emit(text, args.out)


def _classes_arg(text, pattern, count):
    if text is None:
        picked = list(range(count))
    else:
        toks = text.split(",")
        if len(toks) != count:
            raise UsageError(f"--classes needs {count} class label(s)")
        picked = []
        for tok in toks:
            if tok not in pattern.classes:
                raise DataError(f"unknown class {tok!r}; classes are {list(pattern.classes)}")
            picked.append(pattern.classes.index(tok))
    if max(picked) >= pattern.q:
        raise DataError(f"pattern has only {pattern.q} class(es)")
    return picked


def _run_kfun(args):
    pattern = _load_pattern(args)
    grid = _grid(args, pattern.region)
    if args.bivariate:
        i, j = _classes_arg(args.classes, pattern, 2)
        est = k_bivariate(pattern, i, j, grid)
    else:
        (i,) = _classes_arg(args.classes, pattern, 1)
        est = k_univariate(pattern, i, grid)
    _emit(est.to_csv(args.transform), args.out)


def _run_pcf(args):
    pattern = _load_pattern(args)
    grid = _grid(args, pattern.region)
    (i,) = _classes_arg(args.classes, pattern, 1)
    _emit(pcf(k_univariate(pattern, i, grid), args.bandwidth).to_csv(), args.out)


def _run_envelope(args):
    _need_seed(args)
    if args.spec is None and args.input is None:
        raise UsageError("envelope: --spec or --input is required")
    pattern = None
    if args.input:
        pattern = _load_pattern(args)
        spec = _spec(args.spec) if args.spec else CsrUniform(
            tuple(int(s) for s in pattern.class_sizes), pattern.region)
        region = pattern.region
    else:
        spec = _spec(args.spec)
        region = getattr(spec, "region", None) or StudyRegion.unit()
    grid = _grid(args, region)
    count = 2 if args.statistic == "k_biv" else 1
    if pattern is not None:
        classes = _classes_arg(args.classes, pattern, count)
    else:
        classes = list(range(count)) if args.classes is None else args.classes.split(",")
    if count == 1:
        classes = classes + [classes[0]]
    env = envelope(spec, args.statistic, grid=grid, n_sim=args.nsim, seed=args.seed,
                   level=args.level, classes=tuple(classes), bandwidth=args.bandwidth,
                   workers=_workers(args.workers))
    observed = None
    if pattern is not None:
        if args.statistic == "k_uni":
            observed = k_univariate(pattern, classes[0], grid).l_minus_t
        elif args.statistic == "k_biv":
            observed = k_bivariate(pattern, classes[0], classes[1], grid).l_minus_t
        else:
            observed = pcf(k_univariate(pattern, classes[0], grid), args.bandwidth).g_hat
    _emit(env.to_csv(observed), args.out)


def _run_fixture(args):
    if args.name == "list":
        print("\n".join(available_fixtures()))
        return EXIT_OK
    result = run_fixture(args.name)
    print(result.describe())
    return EXIT_OK if result.passed else EXIT_DATA


# ------------------------------------------------------------------ parser


def build_parser():
    p = _Parser(prog="nnctseg", description="NNCT tests of spatial segregation and association.",
                epilog=SPEC_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"nnctseg {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def common(sp, seed=True, workers=False, out=True):
        if seed:
            sp.add_argument("--seed", type=int, help="seed for all randomness")
        if workers:
            sp.add_argument("--workers", type=int, default=None,
                            help="parallel worker processes (default: $NNCT_WORKERS or 1)")
        if out:
            sp.add_argument("--out", help="output file (default: stdout)")

    def pattern_args(sp, required=True):
        sp.add_argument("--input", required=required, help="pattern CSV with header x,y,class")
        sp.add_argument("--region", help="xmin,xmax,ymin,ymax (default: bounding box)")
        sp.add_argument("--jitter", action="store_true",
                        help="perturb coordinates by up to 1e-9 to break duplicates (seeded)")

    def grid_args(sp):
        sp.add_argument("--tmax", type=float, help="largest distance (default: quarter of the "
                                                    "smaller region side)")
        sp.add_argument("--steps", type=int, default=128, help="grid size (default 128)")

    t = sub.add_parser("test", help="run the NNCT tests")
    pattern_args(t, required=False)
    t.add_argument("--table", help="NNCT CSV for table-only mode")
    t.add_argument("--q", type=int, help="Q for table-only mode")
    t.add_argument("--r", type=int, help="R for table-only mode")
    t.add_argument("--sizes", help="class sizes to check against the table row sums")
    t.add_argument("--null", choices=("rl", "csr"), default="rl",
                   help="Monte Carlo null model (default rl)")
    t.add_argument("--nmc", type=int, default=0, help="Monte Carlo replications (default 0)")
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common(t, workers=True)

    g = sub.add_parser("gen", help="generate a pattern", epilog=SPEC_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    g.add_argument("--spec", required=True)
    common(g)

    for name, helptext in (("size", "empirical size under a null"),
                           ("power", "empirical power under an alternative")):
        s = sub.add_parser(name, help=helptext, epilog=SPEC_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        s.add_argument("--spec", required=True)
        s.add_argument("--nmc", type=int, required=True)
        s.add_argument("--criticals", choices=("asy", "mc"), default="asy")
        s.add_argument("--null-spec", help="null for MC critical values (default: CSR)")
        s.add_argument("--alpha", type=float, default=0.05)
        s.add_argument("--format", choices=("csv", "json"), default="csv")
        common(s, workers=True)

    k = sub.add_parser("kfun", help="Ripley K/L as CSV")
    pattern_args(k)
    k.add_argument("--classes", help="class label (or two labels with --bivariate)")
    k.add_argument("--bivariate", action="store_true")
    k.add_argument("--transform", choices=("k", "l", "l_minus_t"), default="l_minus_t")
    grid_args(k)
    common(k)

    c = sub.add_parser("pcf", help="pair correlation function as CSV")
    pattern_args(c)
    c.add_argument("--classes", help="class label")
    c.add_argument("--bandwidth", type=float)
    grid_args(c)
    common(c)

    e = sub.add_parser("envelope", help="pointwise simulation envelope as CSV", epilog=SPEC_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    pattern_args(e, required=False)
    e.add_argument("--spec", help="null process (default: CSR with the input's class sizes)")
    e.add_argument("--statistic", choices=STATISTICS, default="k_uni")
    e.add_argument("--classes")
    e.add_argument("--nsim", type=int, default=99)
    e.add_argument("--level", type=float, default=0.95)
    e.add_argument("--bandwidth", type=float)
    grid_args(e)
    common(e, workers=True)

    f = sub.add_parser("fixture", help="check a bundled reference table ('list' to list)")
    f.add_argument("name")
    return p


_COMMANDS = {"test": _run_test, "gen": _run_gen, "size": _run_rates, "power": _run_rates,
             "kfun": _run_kfun, "pcf": _run_pcf, "envelope": _run_envelope,
             "fixture": _run_fixture}


def main(argv=None):
    """Run the CLI and return the exit status."""
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "workers", None) is not None and args.workers < 1:
            raise UsageError("--workers must be at least 1")
        code = _COMMANDS[args.command](args)
        return EXIT_OK if code is None else code
    except SystemExit as exc:  # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NegativeVarianceError, NonSymmetricMatrixError, SupremumViolation,
            np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, DuplicatePointError, SpecError, FixtureError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
