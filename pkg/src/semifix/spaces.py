"""Semimetric spaces: built-in continuous instances and finite matrix spaces."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Any, Callable, Optional

import numpy as np

from . import kernels
from ._tol import slack
from .errors import FormatError, InvalidParameterError, UnsupportedError
from .triangle import TriangleFunction, from_json as tf_from_json, make_builtin


@dataclass(frozen=True)
class SpaceFlags:
    """Analytic properties that are declared, never verified by sampling."""

    complete: bool = True
    continuous_semimetric: bool = True
    n_points: Optional[int] = None  # None for infinite spaces

    def to_json(self):
        return {"complete": self.complete, "continuous_semimetric": self.continuous_semimetric}


@dataclass(frozen=True, eq=False)
class Space:
    name: str
    dist: Callable[[Any, Any], float]
    tf: TriangleFunction
    flags: SpaceFlags = SpaceFlags()
    sampler: Optional[Callable[[int, int], list]] = None
    catalog: dict = field(default_factory=dict)
    format_point: Callable[[Any], Any] = repr
    parse_point: Optional[Callable[[str], Any]] = None

    def with_tf(self, tf):
        return replace(self, tf=tf)


# -- built-in spaces ---------------------------------------------------------

def _abs_dist(x, y):
    return abs(x - y)


def _sq_dist(x, y):
    return (x - y) * (x - y)


def _lcp(a, b):
    n = 0
    for ca, cb in zip(a, b):
        if ca != cb:
            break
        n += 1
    return n


def lcp_dist(a, b):
    """``2^-lcp(a, b)`` for distinct strings, 0 for equal ones."""
    if a == b:
        return 0.0
    return math.ldexp(1.0, -_lcp(a, b))


def _real_sampler(half_width):
    grid = np.concatenate(([0.0, 1.0, -1.0, 0.5, 2.0], np.linspace(-half_width, half_width, 41)))

    def sample(count, seed):
        rng = np.random.default_rng(seed)
        extra = max(count - len(grid), 0)
        pts = np.concatenate((grid, rng.uniform(-half_width, half_width, extra)))
        return [float(p) for p in pts]

    return sample


def _string_sampler(m):
    def sample(count, seed):
        if 2**m <= 4096:
            return ["".join(bits) for bits in product("01", repeat=m)]
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(max(count, 16)):
            s = rng.integers(0, 2, size=m)
            # bias toward long shared prefixes so small distances appear
            cut = int(rng.integers(0, m + 1))
            s[:cut] = 0
            out.append("".join("01"[b] for b in s))
        return out

    return sample


def _half_plus_one(x):
    return x / 2 + 1


def _quarter(x):
    return x / 4


def _shift_in_zero(s):
    return "0" + s[:-1]


def builtin_space(name, m=None, tf=None):
    """Return a built-in space with its catalog of self-maps.

    ``real_line``          |x - y| on the reals, Sum
    ``squared_line``       (x - y)^2 on the reals, Power(q=1/2)
    ``string_ultrametric`` 2^-lcp on binary strings of length ``m``, Max
    """
    if name == "real_line":
        space = Space(
            name, _abs_dist, make_builtin("sum"), sampler=_real_sampler(1e6),
            catalog={"half_plus_one": _half_plus_one, "quarter": _quarter},
            format_point=float, parse_point=float,
        )
    elif name == "squared_line":
        space = Space(
            name, _sq_dist, make_builtin("power", q=0.5), sampler=_real_sampler(1e3),
            catalog={"half_plus_one": _half_plus_one, "quarter": _quarter},
            format_point=float, parse_point=float,
        )
    elif name == "string_ultrametric":
        if m is None or int(m) < 1:
            raise InvalidParameterError("string_ultrametric needs string length m >= 1")
        m = int(m)

        def parse(s, m=m):
            if len(s) != m or set(s) - {"0", "1"}:
                raise FormatError(f"expected a binary string of length {m}, got {s!r}")
            return s

        space = Space(
            name, lcp_dist, make_builtin("max"), SpaceFlags(n_points=2**m),
            sampler=_string_sampler(m),
            catalog={"shift_in_zero": _shift_in_zero, "zeros": lambda s: "0" * len(s)},
            format_point=str, parse_point=parse,
        )
    else:
        raise InvalidParameterError(f"unknown space {name!r}")
    return space if tf is None else space.with_tf(tf)


# -- finite spaces -------------------------------------------------------------

@dataclass(frozen=True)
class SelfMap:
    """A self-map of an n-point space as an index table."""

    table: tuple

    def __post_init__(self):
        try:
            table = tuple(int(t) for t in self.table)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"map entries must be integers: {self.table!r}") from exc
        if any(isinstance(t, bool) or t != u for t, u in zip(self.table, table)):
            raise FormatError(f"map entries must be integers: {self.table!r}")
        object.__setattr__(self, "table", table)

    def __call__(self, i):
        return self.table[i]

    def __len__(self):
        return len(self.table)

    def check(self, n):
        if len(self.table) != n:
            raise FormatError(f"map has length {len(self.table)}, space has {n} points")
        bad = [t for t in self.table if not 0 <= t < n]
        if bad:
            raise FormatError(f"map images out of range [0, {n}): {bad}")
        return self

    def image(self):
        return sorted(set(self.table))


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    labels: tuple
    d: np.ndarray
    tf: TriangleFunction
    flags: SpaceFlags = None

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        if len(set(labels)) != len(labels):
            raise FormatError("labels must be distinct")
        try:
            d = np.array(self.d, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"distance matrix is ragged or non-numeric: {exc}") from exc
        n = len(labels)
        if n < 1:
            raise FormatError("a finite space needs at least one point")
        if d.shape != (n, n):
            raise FormatError(f"distance matrix has shape {d.shape}, expected ({n}, {n})")
        d.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "d", d)
        flags = self.flags or SpaceFlags()
        object.__setattr__(self, "flags", replace(flags, n_points=n))

    @property
    def n(self):
        return len(self.labels)

    def dist(self, i, j):
        return float(self.d[i, j])

    def format_point(self, i):
        return self.labels[i]

    def parse_point(self, s):
        return self.index(s)

    def index(self, key):
        if isinstance(key, (int, np.integer)) and not isinstance(key, bool):
            if 0 <= key < self.n:
                return int(key)
            raise FormatError(f"point index {key} out of range")
        try:
            return self.labels.index(str(key))
        except ValueError:
            pass
        try:
            return self.index(int(key))
        except (TypeError, ValueError):
            raise FormatError(f"unknown point {key!r}") from None

    def with_tf(self, tf):
        return replace(self, tf=tf)

    def to_json(self, selfmap=None, **extra):
        out = {
            "labels": list(self.labels),
            "d": self.d.tolist(),
            "phi": self.tf.to_json(),
            "flags": self.flags.to_json(),
        }
        if selfmap is not None:
            out["map"] = list(selfmap.table)
        out.update(extra)
        return out


def finite_from_json(obj):
    """Parse the finite-space document; returns ``(space, selfmap or None)``."""
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise FormatError("finite space document must be a JSON object")
    for key in ("labels", "d", "phi"):
        if key not in obj:
            raise FormatError(f"finite space document lacks {key!r}")
    d = obj["d"]
    if not isinstance(d, list) or any(not isinstance(r, list) for r in d):
        raise FormatError("'d' must be a list of rows")
    if len({len(r) for r in d}) > 1:
        raise FormatError("'d' is ragged")
    flags = obj.get("flags") or {}
    fs = FiniteSpace(
        obj["labels"], d, tf_from_json(obj["phi"]),
        SpaceFlags(
            complete=bool(flags.get("complete", True)),
            continuous_semimetric=bool(flags.get("continuous_semimetric", True)),
        ),
    )
    selfmap = None
    if obj.get("map") is not None:
        selfmap = SelfMap(obj["map"]).check(fs.n)
    return fs, selfmap


@dataclass(frozen=True)
class FiniteVerdict:
    passed: bool
    violations: tuple  # (kind, i, j)


def validate_finite(fs):
    """Check semimetric axioms: finite, zero diagonal, symmetric, positive off-diagonal."""
    d = fs.d
    n = fs.n
    out = []
    for i in range(n):
        for j in range(n):
            v = d[i, j]
            if not math.isfinite(v):
                out.append(("non_finite", i, j))
            elif v < 0.0:
                out.append(("negative", i, j))
            elif i == j and v != 0.0:
                out.append(("nonzero_diagonal", i, j))
            elif i != j and v == 0.0:
                out.append(("indiscernible", i, j))
            if i < j and d[i, j] != d[j, i]:
                out.append(("asymmetric", i, j))
    return FiniteVerdict(not out, tuple(out))


def validate_space(space, budget=10_000, seed=0):
    """Sampled version of :func:`validate_finite` for infinite spaces."""
    if space.sampler is None:
        raise UnsupportedError(f"space {space.name!r} has no sampler")
    pts = space.sampler(budget, seed)
    rng = np.random.default_rng(seed)
    out = []
    for a, b in rng.integers(0, len(pts), size=(budget, 2)):
        x, y = pts[a], pts[b]
        dxy, dyx = space.dist(x, y), space.dist(y, x)
        if dxy != dyx:
            out.append(("asymmetric", x, y))
        if x == y and dxy != 0.0:
            out.append(("nonzero_diagonal", x, y))
        if x != y and not dxy > 0.0:
            out.append(("indiscernible", x, y))
        if len(out) >= 10:
            break
    return FiniteVerdict(not out, tuple(out))


@dataclass(frozen=True)
class TrVerdict:
    passed: bool
    worst: tuple  # (x, y, z) maximising d(x,y) - phi(d(x,z), d(z,y))
    excess: float
    checked: int


def check_tr(space, tf=None, budget=10_000, seed=0):
    """Check ``d(x,y) <= phi(d(x,z), d(z,y))``.

    Finite spaces are enumerated over all ordered triples (budget ignored);
    other spaces draw ``budget`` triples from their sampler.
    """
    tf = tf or space.tf
    if isinstance(space, FiniteSpace):
        return _check_tr_finite(space, tf)
    if space.sampler is None:
        raise UnsupportedError(f"space {space.name!r} has no sampler")
    pts = space.sampler(max(budget, 64), seed)
    rng = np.random.default_rng(seed + 1)
    ok = True
    worst, worst_e = None, -math.inf
    for a, b, c in rng.integers(0, len(pts), size=(budget, 3)):
        x, y, z = pts[a], pts[b], pts[c]
        lhs = space.dist(x, y)
        rhs = tf.evaluator(space.dist(x, z), space.dist(z, y))
        e = lhs - rhs
        if e > worst_e:
            worst, worst_e = (x, y, z), e
        if e > slack(lhs, rhs):
            ok = False
    return TrVerdict(ok, worst, worst_e, budget)


def _check_tr_finite(fs, tf):
    n = fs.n
    code = kernels.PHI_CODES.get(tf.family)
    if code is not None:
        e, x, y, z = kernels.tr_excess(fs.d, code, tf.K or 1.0, tf.q or 1.0)
    else:
        d = fs.d.tolist()
        e, x, y, z = -math.inf, -1, -1, -1
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    v = d[a][b] - tf.evaluator(d[a][c], d[c][b])
                    if v > e:
                        e, x, y, z = v, a, b, c
    scale = float(np.max(np.abs(fs.d))) if n else 0.0
    return TrVerdict(bool(e <= slack(scale)), (x, y, z), float(e), n**3)
