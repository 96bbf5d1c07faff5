"""Simulators for the null and alternative patterns of the segregation tests.

Each process is a small frozen dataclass with a ``sample(rng)`` method.
:func:`generate` is the seeded entry point, and :func:`parse_spec` /
:func:`format_spec` convert to and from the one-line text form used on the
command line, e.g. ``"seg2 s=1/6 n=50,50"``.

============  =====================================================
keyword        process
============  =====================================================
``csr``        independent uniform classes on a rectangle
``rl``         random labels on fixed locations (``case=1|2|3``)
``seg2``       two-class segregation, shifted squares
``seg3``       three-class segregation, nested squares
``assoc2``     two-class association around anchor points
``assoc3``     three-class association, Y and Z anchored on X
``pcp1``       Poisson cluster process, equal cluster shares
``pcp2``       Poisson cluster process, offspring allocated at random
``matern``     Matérn cluster process
``ipcp``       inhomogeneous Poisson process by thinning
============  =====================================================
"""

from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .geometry import MarkedPattern, StudyRegion
from .numerics import rng_stream

__all__ = [
    "SpecError",
    "SupremumViolation",
    "IntensityFunction",
    "INTENSITIES",
    "CsrUniform",
    "RandomLabel",
    "RlCase",
    "Segregation2",
    "Segregation3",
    "Association2",
    "Association3",
    "Pcp1",
    "Pcp2",
    "Matern",
    "Ipcp",
    "default_class_names",
    "generate",
    "ipcp_thin",
    "rl_case_locations",
    "parse_spec",
    "format_spec",
]


class SpecError(ValueError):
    """Invalid process parameters or an unparseable spec string."""


class SupremumViolation(ValueError):
    """An intensity function exceeded its declared supremum during thinning."""


def default_class_names(q):
    if q <= 3:
        return ("X", "Y", "Z")[:q]
    return tuple(f"C{k + 1}" for k in range(q))


def _rng(seed=None, rng=None):
    if rng is not None:
        return rng
    return rng_stream(seed, 0)


def _sizes(sizes, q=None):
    sizes = tuple(int(s) for s in sizes)
    if q is not None and len(sizes) != q:
        raise SpecError(f"expected {q} class sizes, got {len(sizes)}")
    if not sizes or any(s < 1 for s in sizes):
        raise SpecError(f"class sizes must be positive, got {sizes}")
    return sizes


def _pattern(blocks, region=None, classes=None):
    pts = np.vstack(blocks)
    labels = np.concatenate([np.full(len(b), k, dtype=np.intp) for k, b in enumerate(blocks)])
    if classes is None:
        classes = default_class_names(len(blocks))
    if region is None:
        region = StudyRegion.bounding(pts, include=StudyRegion.unit())
    return MarkedPattern(pts, labels, classes, region)


def _uniform(rng, m, lo, hi, lo_y=None, hi_y=None):
    lo_y = lo if lo_y is None else lo_y
    hi_y = hi if hi_y is None else hi_y
    return np.column_stack([rng.uniform(lo, hi, m), rng.uniform(lo_y, hi_y, m)])


def _ring_offsets(rng, m, radius):
    # uniform radius, as in the association construction (not uniform on the disc)
    rr = rng.uniform(0.0, radius, m)
    tt = rng.uniform(0.0, 2 * np.pi, m)
    return np.column_stack([rr * np.cos(tt), rr * np.sin(tt)])


def _disc_offsets(rng, m, radius):
    rr = radius * np.sqrt(rng.uniform(0.0, 1.0, m))
    tt = rng.uniform(0.0, 2 * np.pi, m)
    return np.column_stack([rr * np.cos(tt), rr * np.sin(tt)])


# --------------------------------------------------------------------- specs


@dataclass(frozen=True)
class CsrUniform:
    """Each class independently uniform on ``region`` with a fixed size."""

    class_sizes: tuple
    region: StudyRegion = field(default_factory=StudyRegion.unit)

    def __post_init__(self):
        object.__setattr__(self, "class_sizes", _sizes(self.class_sizes))

    def sample(self, rng):
        g = self.region
        blocks = [_uniform(rng, m, g.xmin, g.xmax, g.ymin, g.ymax) for m in self.class_sizes]
        return _pattern(blocks, region=g)


@dataclass(frozen=True, eq=False)
class RandomLabel:
    """Random relabeling of fixed ``locations`` with the given class sizes."""

    locations: np.ndarray
    class_sizes: tuple
    region: Optional[StudyRegion] = None

    def __post_init__(self):
        loc = np.array(self.locations, dtype=float)
        sizes = _sizes(self.class_sizes)
        if loc.ndim != 2 or loc.shape[1] != 2 or loc.shape[0] != sum(sizes):
            raise SpecError("locations must be an (n, 2) array with n = sum of class sizes")
        loc.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "class_sizes", sizes)
        if self.region is None:
            object.__setattr__(self, "region", StudyRegion.bounding(loc))

    def labels_for(self, rng):
        base = np.repeat(np.arange(len(self.class_sizes)), self.class_sizes)
        return rng.permutation(base)

    def sample(self, rng):
        return MarkedPattern(self.locations, self.labels_for(rng),
                             default_class_names(len(self.class_sizes)), self.region)


def rl_case_locations(case, class_sizes, rng):
    """Fixed locations for the three random-labeling cases.

    Case 1 is uniform on the unit square. Case 2 uses two overlapping squares
    ``(0, 2/3)^2`` and ``(1/3, 1)^2``. Case 3 uses the disjoint squares
    ``(0, 1)^2`` and ``(2, 3) x (0, 1)``.
    """
    n1, *rest = class_sizes
    n = sum(class_sizes)
    if case == 1:
        return _uniform(rng, n, 0.0, 1.0)
    if len(class_sizes) != 2:
        raise SpecError("RL cases 2 and 3 are defined for two classes")
    n2 = rest[0]
    if case == 2:
        return np.vstack([_uniform(rng, n1, 0.0, 2 / 3), _uniform(rng, n2, 1 / 3, 1.0)])
    if case == 3:
        return np.vstack([_uniform(rng, n1, 0.0, 1.0), _uniform(rng, n2, 2.0, 3.0, 0.0, 1.0)])
    raise SpecError(f"unknown RL case {case}")


@dataclass(frozen=True)
class RlCase:
    """Random labeling on locations drawn by :func:`rl_case_locations`.

    ``sample`` draws both the locations and the labels. Experiments call
    :meth:`freeze` once so that every replication relabels the same points.
    """

    case: int
    class_sizes: tuple

    def __post_init__(self):
        object.__setattr__(self, "class_sizes", _sizes(self.class_sizes))
        if self.case not in (1, 2, 3):
            raise SpecError(f"RL case must be 1, 2 or 3, got {self.case}")
        if self.case != 1 and len(self.class_sizes) != 2:
            raise SpecError("RL cases 2 and 3 are defined for two classes")

    def freeze(self, rng):
        loc = rl_case_locations(self.case, self.class_sizes, rng)
        return RandomLabel(loc, self.class_sizes, StudyRegion.bounding(loc, StudyRegion.unit()))

    def sample(self, rng):
        return self.freeze(rng).sample(rng)


@dataclass(frozen=True)
class Segregation2:
    """X uniform on ``(0, 1-s)^2`` and Y uniform on ``(s, 1)^2``."""

    n1: int
    n2: int
    s: float

    def __post_init__(self):
        _sizes((self.n1, self.n2))
        if not 0 <= self.s < 1:
            raise SpecError(f"s must lie in [0, 1), got {self.s}")

    @property
    def class_sizes(self):
        return (self.n1, self.n2)

    def sample(self, rng):
        s = self.s
        x = _uniform(rng, self.n1, 0.0, 1.0 - s)
        y = _uniform(rng, self.n2, s, 1.0)
        return _pattern([x, y], region=StudyRegion.unit())


@dataclass(frozen=True)
class Segregation3:
    """X on ``(0, 1-2s)^2``, Y on ``(2s, 1)^2`` and Z on ``(s, 1-s)^2``."""

    n1: int
    n2: int
    n3: int
    s: float

    def __post_init__(self):
        _sizes((self.n1, self.n2, self.n3))
        if not 0 <= self.s < 0.5:
            raise SpecError(f"s must lie in [0, 1/2), got {self.s}")

    @property
    def class_sizes(self):
        return (self.n1, self.n2, self.n3)

    def sample(self, rng):
        s = self.s
        x = _uniform(rng, self.n1, 0.0, 1.0 - 2 * s)
        y = _uniform(rng, self.n2, 2 * s, 1.0)
        z = _uniform(rng, self.n3, s, 1.0 - s)
        return _pattern([x, y, z], region=StudyRegion.unit())


@dataclass(frozen=True)
class Association2:
    """X uniform; each Y placed at a random X plus a uniform-radius, uniform-angle offset below ``r``."""

    n1: int
    n2: int
    r: float

    def __post_init__(self):
        _sizes((self.n1, self.n2))
        if not 0 < self.r < 1:
            raise SpecError(f"r must lie in (0, 1), got {self.r}")

    @property
    def class_sizes(self):
        return (self.n1, self.n2)

    def sample(self, rng):
        x = _uniform(rng, self.n1, 0.0, 1.0)
        anchor = rng.integers(0, self.n1, self.n2)
        y = x[anchor] + _ring_offsets(rng, self.n2, self.r)
        return _pattern([x, y])


@dataclass(frozen=True)
class Association3:
    """X uniform; Y and Z each anchored on random X points with radii ``r_y`` and ``r_z``."""

    n1: int
    n2: int
    n3: int
    r_y: float
    r_z: float

    def __post_init__(self):
        _sizes((self.n1, self.n2, self.n3))
        for name in ("r_y", "r_z"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise SpecError(f"{name} must lie in (0, 1), got {v}")

    @property
    def class_sizes(self):
        return (self.n1, self.n2, self.n3)

    def sample(self, rng):
        x = _uniform(rng, self.n1, 0.0, 1.0)
        ay = rng.integers(0, self.n1, self.n2)
        y = x[ay] + _ring_offsets(rng, self.n2, self.r_y)
        az = rng.integers(0, self.n1, self.n3)
        z = x[az] + _ring_offsets(rng, self.n3, self.r_z)
        return _pattern([x, y, z])


@dataclass(frozen=True)
class _PcpBase:
    n_parents: int
    n1: int
    n2: int
    sigma: float
    shared_parents: bool = True

    def __post_init__(self):
        _sizes((self.n1, self.n2))
        if self.n_parents < 1:
            raise SpecError("need at least one parent")
        if not self.sigma > 0:
            raise SpecError(f"sigma must be positive, got {self.sigma}")

    @property
    def class_sizes(self):
        return (self.n1, self.n2)

    def _parents(self, rng):
        first = _uniform(rng, self.n_parents, 0.0, 1.0)
        second = first if self.shared_parents else _uniform(rng, self.n_parents, 0.0, 1.0)
        return first, second

    def _offspring(self, rng, parents, m):
        raise NotImplementedError

    def sample(self, rng):
        px, py = self._parents(rng)
        x = self._offspring(rng, px, self.n1)
        y = self._offspring(rng, py, self.n2)
        return _pattern([x, y])


@dataclass(frozen=True)
class Pcp1(_PcpBase):
    """Each parent gets exactly ``n_i / n_parents`` Gaussian offspring of class ``i``.

    Offspring outside the unit square are kept; the region is enlarged to
    their bounding box.
    """

    def __post_init__(self):
        super().__post_init__()
        for m in (self.n1, self.n2):
            if m % self.n_parents:
                raise SpecError(f"class size {m} is not divisible by n_parents={self.n_parents}")

    def _offspring(self, rng, parents, m):
        per = m // self.n_parents
        centers = np.repeat(parents, per, axis=0)
        return centers + rng.normal(0.0, self.sigma, (m, 2))


@dataclass(frozen=True)
class Pcp2(_PcpBase):
    """Like :class:`Pcp1` but each offspring picks its parent uniformly at random."""

    def __post_init__(self):
        super().__post_init__()
        for m in (self.n1, self.n2):
            if m % self.n_parents:
                raise SpecError(f"class size {m} is not divisible by n_parents={self.n_parents}")

    def _offspring(self, rng, parents, m):
        which = rng.integers(0, self.n_parents, m)
        return parents[which] + rng.normal(0.0, self.sigma, (m, 2))


@dataclass(frozen=True)
class Matern:
    """Matérn cluster process observed on the unit square.

    Parents are Poisson with intensity ``kappa`` on the unit square dilated
    by ``radius``; every parent receives a Poisson(``n_i / kappa``) number of
    class-``i`` offspring uniform on the disc of that radius. Offspring
    outside the unit square are discarded, so class totals are random. With
    ``fixed_size`` the offspring of each class are redrawn until the total is
    exactly ``n_i``.
    """

    kappa: float
    radius: float
    class_sizes: tuple
    shared_parents: bool = True
    fixed_size: bool = False
    max_tries: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "class_sizes", _sizes(self.class_sizes))
        if not self.kappa > 0:
            raise SpecError(f"kappa must be positive, got {self.kappa}")
        if not self.radius > 0:
            raise SpecError(f"radius must be positive, got {self.radius}")

    @property
    def mu(self):
        return tuple(m / self.kappa for m in self.class_sizes)

    def _parents(self, rng):
        lo, hi = -self.radius, 1.0 + self.radius
        count = rng.poisson(self.kappa * (hi - lo) ** 2)
        return _uniform(rng, count, lo, hi)

    def _cluster(self, rng, parents, mu):
        counts = rng.poisson(mu, parents.shape[0])
        centers = np.repeat(parents, counts, axis=0)
        pts = centers + _disc_offsets(rng, centers.shape[0], self.radius)
        keep = np.all((pts >= 0.0) & (pts <= 1.0), axis=1)
        return pts[keep]

    def sample(self, rng):
        q = len(self.class_sizes)
        for _ in range(self.max_tries):
            shared = self._parents(rng) if self.shared_parents else None
            blocks = []
            for k in range(q):
                parents = shared if shared is not None else self._parents(rng)
                block = self._cluster(rng, parents, self.mu[k])
                if self.fixed_size:
                    tries = 0
                    while block.shape[0] != self.class_sizes[k] and tries < self.max_tries:
                        block = self._cluster(rng, parents, self.mu[k])
                        tries += 1
                    if block.shape[0] != self.class_sizes[k]:
                        break
                if block.shape[0] == 0:
                    break
                blocks.append(block)
            if len(blocks) == q:
                return _pattern(blocks, region=StudyRegion.unit())
        raise SpecError("could not draw a Matérn pattern with every class nonempty")


@dataclass(frozen=True)
class IntensityFunction:
    """Per-unit intensity shape ``f(x, y)`` with a declared upper bound on the unit square."""

    name: str
    func: Callable
    sup: float

    def __call__(self, x, y):
        return self.func(x, y)


def _sqrt_sum(x, y):
    return np.sqrt(x + y)


def _sqrt_prod(x, y):
    return np.sqrt(x * y)


def _abs_diff(x, y):
    return np.abs(x - y)


def _const(x, y):
    return np.ones_like(x)


# module-level functions so specs pickle into worker processes
INTENSITIES = {
    "sqrt_sum": IntensityFunction("sqrt_sum", _sqrt_sum, float(np.sqrt(2.0))),
    "sqrt_prod": IntensityFunction("sqrt_prod", _sqrt_prod, 1.0),
    "abs_diff": IntensityFunction("abs_diff", _abs_diff, 1.0),
    "const": IntensityFunction("const", _const, 1.0),
}


def _intensity(f):
    if isinstance(f, IntensityFunction):
        return f
    if isinstance(f, str):
        try:
            return INTENSITIES[f]
        except KeyError:
            raise SpecError(f"unknown intensity {f!r}; choose from {sorted(INTENSITIES)}") from None
    raise SpecError(f"not an intensity function: {f!r}")


def ipcp_thin(intensity, scale, region=None, rng=None, sup=None, seed=None):
    """Inhomogeneous Poisson points with intensity ``scale * f`` by independent thinning.

    A homogeneous process of intensity ``scale * sup`` is thinned with
    retention probability ``f / sup``.

    Raises
    ------
    SupremumViolation
        If ``f`` exceeds ``sup`` at any proposed point.
    """
    region = StudyRegion.unit() if region is None else region
    rng = _rng(seed, rng)
    if isinstance(intensity, (str, IntensityFunction)):
        f = _intensity(intensity)
        func, bound = f.func, f.sup if sup is None else sup
    else:
        if sup is None:
            raise SpecError("a callable intensity needs a declared supremum")
        func, bound = intensity, sup
    if not bound > 0:
        raise SpecError(f"intensity supremum must be positive, got {bound}")
    count = rng.poisson(scale * bound * region.area)
    pts = _uniform(rng, count, region.xmin, region.xmax, region.ymin, region.ymax)
    vals = np.asarray(func(pts[:, 0], pts[:, 1]), dtype=float)
    if np.any(vals < 0):
        raise SpecError("intensity function is negative somewhere")
    if np.any(vals > bound * (1 + 1e-12)):
        raise SupremumViolation(f"intensity reached {vals.max():.6g} above the declared bound {bound}")
    keep = rng.uniform(0.0, 1.0, count) < vals / bound
    return pts[keep]


@dataclass(frozen=True)
class Ipcp:
    """Independent inhomogeneous Poisson classes with intensities ``n_i f_i`` on the unit square.

    Class totals are Poisson. A draw in which some class is empty is
    redrawn, up to ``max_tries`` times.
    """

    intensities: tuple
    class_sizes: tuple
    max_tries: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "intensities", tuple(_intensity(f) for f in self.intensities))
        object.__setattr__(self, "class_sizes", _sizes(self.class_sizes, len(self.intensities)))
        for f in self.intensities:
            if not f.sup > 0:
                raise SpecError(f"intensity {f.name} has a non-positive supremum")

    def sample(self, rng):
        for _ in range(self.max_tries):
            blocks = [ipcp_thin(f, m, rng=rng) for f, m in zip(self.intensities, self.class_sizes)]
            if all(b.shape[0] > 0 for b in blocks) and sum(b.shape[0] for b in blocks) >= 4:
                return _pattern(blocks, region=StudyRegion.unit())
        raise SpecError("could not draw an IPCP pattern with every class nonempty")


def generate(spec, seed=None, rng=None) -> MarkedPattern:
    """Draw one pattern from ``spec`` using ``rng`` or the stream derived from ``seed``."""
    if rng is None and seed is None:
        raise ValueError("pass a seed or a generator")
    return spec.sample(_rng(seed, rng))


# --------------------------------------------------------------- text format

_KIND = {
    CsrUniform: "csr", RlCase: "rl", Segregation2: "seg2", Segregation3: "seg3",
    Association2: "assoc2", Association3: "assoc3", Pcp1: "pcp1", Pcp2: "pcp2",
    Matern: "matern", Ipcp: "ipcp",
}


def _num(text):
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise SpecError(f"not a number: {text!r}") from None


def _fmt_num(x):
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    if len(repr(x)) <= 6:
        return repr(x)
    frac = Fraction(x).limit_denominator(1000)
    if float(frac) == x:
        return f"{frac.numerator}/{frac.denominator}"
    return repr(x)


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise SpecError(f"expected comma-separated integers, got {text!r}") from None


def _flag(text, true_word, false_word, key):
    if text == true_word:
        return True
    if text == false_word:
        return False
    raise SpecError(f"{key} must be {true_word!r} or {false_word!r}, got {text!r}")


def parse_spec(text):
    """Parse ``"<kind> key=value ..."`` into a process spec.

    Keys by kind::

        csr     n=50,50 [region=xmin,xmax,ymin,ymax]
        rl      n=50,50 [case=1]
        seg2    n=50,50 s=1/6
        seg3    n=50,50,50 s=1/12
        assoc2  n=30,50 r=1/10
        assoc3  n=50,50,50 ry=1/7 rz=1/10
        pcp1    n=50,50 np=5 sigma=0.05 [parents=shared|different]
        pcp2    (as pcp1)
        matern  n=50,50 kappa=5 radius=0.05 [parents=shared|different] [size=poisson|fixed]
        ipcp    n=50,50 f=sqrt_sum,abs_diff

    Fractions such as ``1/6`` are accepted wherever a real is expected.
    """
    parts = text.split()
    if not parts:
        raise SpecError("empty spec")
    kind, *items = parts
    kv = {}
    for item in items:
        if "=" not in item:
            raise SpecError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        if k in kv:
            raise SpecError(f"duplicate key {k!r}")
        kv[k] = v

    def take(key, default=None, required=True):
        if key in kv:
            return kv.pop(key)
        if default is None and required:
            raise SpecError(f"{kind}: missing {key}=")
        return default

    n = _int_list(take("n"))
    try:
        if kind == "csr":
            reg = take("region", "", required=False)
            if reg:
                bounds = [_num(v) for v in reg.split(",")]
                if len(bounds) != 4:
                    raise SpecError("region needs xmin,xmax,ymin,ymax")
                spec = CsrUniform(n, StudyRegion(*bounds))
            else:
                spec = CsrUniform(n)
        elif kind == "rl":
            spec = RlCase(int(take("case", "1")), n)
        elif kind == "seg2":
            spec = Segregation2(*_sizes(n, 2), _num(take("s")))
        elif kind == "seg3":
            spec = Segregation3(*_sizes(n, 3), _num(take("s")))
        elif kind == "assoc2":
            spec = Association2(*_sizes(n, 2), _num(take("r")))
        elif kind == "assoc3":
            spec = Association3(*_sizes(n, 3), _num(take("ry")), _num(take("rz")))
        elif kind in ("pcp1", "pcp2"):
            cls = Pcp1 if kind == "pcp1" else Pcp2
            shared = _flag(take("parents", "shared"), "shared", "different", "parents")
            spec = cls(int(take("np")), *_sizes(n, 2), _num(take("sigma")), shared)
        elif kind == "matern":
            shared = _flag(take("parents", "shared"), "shared", "different", "parents")
            fixed = _flag(take("size", "poisson"), "fixed", "poisson", "size")
            spec = Matern(_num(take("kappa")), _num(take("radius")), n, shared, fixed)
        elif kind == "ipcp":
            spec = Ipcp(tuple(take("f").split(",")), n)
        else:
            raise SpecError(f"unknown process {kind!r}; choose from {sorted(_KIND.values())}")
    except TypeError as exc:
        raise SpecError(f"{kind}: {exc}") from None
    if kv:
        raise SpecError(f"{kind}: unexpected keys {sorted(kv)}")
    return spec


def format_spec(spec):
    """Canonical text form; ``parse_spec(format_spec(s)) == s`` for every text-expressible spec."""
    kind = _KIND.get(type(spec))
    if kind is None:
        raise SpecError(f"{type(spec).__name__} has no text form")
    sizes = ",".join(str(m) for m in spec.class_sizes)
    out = [kind, f"n={sizes}"]
    if isinstance(spec, CsrUniform):
        if spec.region != StudyRegion.unit():
            out.append("region=" + ",".join(_fmt_num(v) for v in spec.region.as_tuple()))
    elif isinstance(spec, RlCase):
        out.append(f"case={spec.case}")
    elif isinstance(spec, (Segregation2, Segregation3)):
        out.append(f"s={_fmt_num(spec.s)}")
    elif isinstance(spec, Association2):
        out.append(f"r={_fmt_num(spec.r)}")
    elif isinstance(spec, Association3):
        out += [f"ry={_fmt_num(spec.r_y)}", f"rz={_fmt_num(spec.r_z)}"]
    elif isinstance(spec, _PcpBase):
        out += [f"np={spec.n_parents}", f"sigma={_fmt_num(spec.sigma)}",
                f"parents={'shared' if spec.shared_parents else 'different'}"]
    elif isinstance(spec, Matern):
        out += [f"kappa={_fmt_num(spec.kappa)}", f"radius={_fmt_num(spec.radius)}",
                f"parents={'shared' if spec.shared_parents else 'different'}",
                f"size={'fixed' if spec.fixed_size else 'poisson'}"]
    elif isinstance(spec, Ipcp):
        for f in spec.intensities:
            if INTENSITIES.get(f.name) is not f:
                raise SpecError(f"custom intensity {f.name!r} has no text form")
        out.append("f=" + ",".join(f.name for f in spec.intensities))
    return " ".join(out)


def spec_fields(spec):
    """Plain-dict view of a spec for reports."""
    return {f.name: getattr(spec, f.name) for f in fields(spec)}
