"""The five contraction families: coefficients, side conditions, finite checks.

Each family bounds ``d(Tx, Ty)``:

* ``banach``      alpha d(x,y)
* ``kannan``      beta (d(x,Tx) + d(y,Ty))
* ``chatterjea``  beta (d(x,Ty) + d(y,Tx))
* ``crr``         alpha d(x,y) + beta d(x,Tx) + gamma d(y,Ty)
* ``perimeter``   image perimeter <= alpha * perimeter, for pairwise distinct triples
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import kernels
from ._tol import slack
from .errors import FormatError, InvalidParameterError
from .spaces import SpaceFlags
from .triangle import MAX, SCALED_SUM, SUM, CBoundVerdict, c_alpha, psi_inverse

BANACH = "banach"
KANNAN = "kannan"
CHATTERJEA = "chatterjea"
CRR = "crr"
PERIMETER = "perimeter"
FAMILIES = (BANACH, KANNAN, CHATTERJEA, CRR, PERIMETER)

INFEASIBLE = math.inf

# theorem paths
PATH_BANACH = "banach"
PATH_KANNAN = "kannan"
PATH_CHATTERJEA = "chatterjea"
PATH_CHATTERJEA_BMETRIC = "chatterjea_bmetric"
PATH_CRR = "ciric_reich_rus"
PATH_PERIMETER = "perimeter"


def _coef(x, name):
    # exact rationals are kept so step ratios like 1/3 -> 1/2 stay exact
    if not isinstance(x, Fraction):
        x = float(x)
        if not math.isfinite(x):
            raise InvalidParameterError(f"{name} must be finite, got {x!r}")
    if x < 0:
        raise InvalidParameterError(f"{name} must be >= 0, got {x!r}")
    return x


@dataclass(frozen=True)
class ContractionSpec:
    family: str
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"unknown contraction family {self.family!r}")
        a = _coef(self.alpha, "alpha")
        b = _coef(self.beta, "beta")
        g = _coef(self.gamma, "gamma")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "gamma", g)
        f = self.family
        if f in (BANACH, PERIMETER) and not a < 1.0:
            raise InvalidParameterError(f"{f} needs alpha in [0, 1), got {a!r}")
        if f == KANNAN and not b < 0.5:
            raise InvalidParameterError(f"kannan needs beta in [0, 1/2), got {b!r}")
        if f == CRR and not a + b + g < 1.0:
            raise InvalidParameterError(f"crr needs alpha + beta + gamma < 1, got {a + b + g!r}")

    @classmethod
    def banach(cls, alpha):
        return cls(BANACH, alpha=alpha)

    @classmethod
    def kannan(cls, beta):
        return cls(KANNAN, beta=beta)

    @classmethod
    def chatterjea(cls, beta):
        return cls(CHATTERJEA, beta=beta)

    @classmethod
    def crr(cls, alpha, beta, gamma):
        return cls(CRR, alpha=alpha, beta=beta, gamma=gamma)

    @classmethod
    def perimeter(cls, alpha):
        return cls(PERIMETER, alpha=alpha)

    def to_json(self):
        a, b, g = float(self.alpha), float(self.beta), float(self.gamma)
        if self.family in (BANACH, PERIMETER):
            return {"family": self.family, "alpha": a}
        if self.family in (KANNAN, CHATTERJEA):
            return {"family": self.family, "beta": b}
        return {"family": self.family, "alpha": a, "beta": b, "gamma": g}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or obj.get("family") not in FAMILIES:
            raise FormatError(f"bad contraction descriptor {obj!r}")
        keys = {k: obj[k] for k in ("alpha", "beta", "gamma") if obj.get(k) is not None}
        return cls(obj["family"], **keys)


def step_ratio(spec, tf):
    """Per-step ratio of the Picard orbit implied by ``spec``; ``INFEASIBLE`` if >= 1.

    Rational formulas are evaluated exactly on the coefficients' binary
    values and rounded once.
    """
    f = spec.family
    if f in (BANACH, PERIMETER):
        r = float(spec.alpha)
    elif f == KANNAN:
        b = Fraction(spec.beta)
        r = float(b / (1 - b))
    elif f == CRR:
        a, b, g = Fraction(spec.alpha), Fraction(spec.beta), Fraction(spec.gamma)
        r = float((a + b) / (1 - g))
    else:
        if spec.beta == 0:
            return 0.0
        b = Fraction(spec.beta)
        if tf.family in (MAX, SUM, SCALED_SUM):
            # piecewise-linear psi: invert exactly
            inv = 1 / b if tf.family == MAX else 1 / (b * Fraction(tf.K or 1)) - 1
            if inv <= 1:
                return INFEASIBLE
            r = float(1 / inv)
        else:
            inv = psi_inverse(tf, float(1 / b))
            if not math.isfinite(inv) or inv <= 1.0:
                return INFEASIBLE
            r = 1.0 / inv
    return r if r < 1.0 else INFEASIBLE


@dataclass(frozen=True)
class Condition:
    name: str
    passed: bool
    detail: str = ""

    def to_json(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class Applicability:
    applicable: bool
    step_ratio: float
    c_bound: CBoundVerdict
    conditions: tuple
    theorem_path: str

    def failed(self):
        return [c for c in self.conditions if not c.passed]

    def with_conditions(self, extra):
        """Append conditions (e.g. map-specific ones); recomputes ``applicable``."""
        conds = self.conditions + tuple(extra)
        ok = all(c.passed for c in conds)
        return Applicability(ok, self.step_ratio, self.c_bound, conds, self.theorem_path)

    def to_json(self):
        return {
            "applicable": self.applicable,
            "theorem_path": self.theorem_path,
            "step_ratio": self.step_ratio if math.isfinite(self.step_ratio) else None,
            "c_bound": self.c_bound.to_json() if self.c_bound else None,
            "conditions": [c.to_json() for c in self.conditions],
        }


def _fmt(x):
    return "inf" if not math.isfinite(x) else f"{x:.12g}"


def _base_conditions(tf, flags, *, continuous_everywhere):
    conds = [
        Condition("complete space", flags.complete, "declared flag"),
        Condition("homogeneous phi", tf.homogeneous, f"{tf.describe()} claims homogeneity={tf.homogeneous}"),
    ]
    if continuous_everywhere:
        conds.append(Condition("phi continuous", tf.continuous_everywhere, "declared flag"))
    else:
        conds.append(Condition("phi continuous at origin", tf.continuous_at_origin, "declared flag"))
    return conds


def _cbound_condition(tf, ratio, note=""):
    if not math.isfinite(ratio):
        return None, Condition("step ratio < 1", False, "step ratio infeasible")
    cb = c_alpha(tf, ratio)
    detail = f"C({_fmt(ratio)}) = {_fmt(cb.value)} [{cb.method}]"
    if note and not cb.bounded:
        detail += f"; {note}"
    return cb, Condition("Cauchy bound finite at step ratio", cb.bounded, detail)


def applicability(spec, tf, flags=None):
    """Evaluate every side condition of the theorem covering ``spec``.

    Returns the full ledger; ``applicable`` is true iff every condition
    passes.  The one exception to "C finite" is the b-metric Chatterjea
    path, which carries its own convergence argument.
    """
    flags = flags or SpaceFlags()
    f = spec.family
    ratio = step_ratio(spec, tf)
    if f == CHATTERJEA:
        return _chatterjea(spec, tf, flags, ratio)

    conds = _base_conditions(tf, flags, continuous_everywhere=f in (KANNAN, CRR))
    conds.append(Condition("step ratio < 1", math.isfinite(ratio), f"ratio = {_fmt(ratio)}"))
    note = ""
    if tf.family == SCALED_SUM and f == KANNAN and tf.K <= 2.0:
        note = "the bare K <= 2 rule would accept this; K * ratio < 1 is also needed"
    elif tf.family == SCALED_SUM and f == CRR and float(spec.gamma) * tf.K < 1.0:
        note = "the bare K < 1/gamma rule would accept this; K * ratio < 1 is also needed"
    cb, cond = _cbound_condition(tf, ratio, note)
    conds.append(cond)

    if f == KANNAN:
        v = tf.evaluator(0.0, float(spec.beta))
        conds.append(Condition("phi(0, beta) < 1", v < 1.0, f"phi(0, {float(spec.beta):g}) = {_fmt(v)}"))
        path = PATH_KANNAN
    elif f == CRR:
        v = tf.evaluator(0.0, float(spec.gamma))
        conds.append(Condition("phi(0, gamma) < 1", v < 1.0, f"phi(0, {float(spec.gamma):g}) = {_fmt(v)}"))
        path = PATH_CRR
    elif f == PERIMETER:
        if flags.n_points is not None:
            conds.append(Condition("at least three points", flags.n_points >= 3, f"|X| = {flags.n_points}"))
        path = PATH_PERIMETER
    else:
        path = PATH_BANACH
    conds = tuple(conds)
    return Applicability(all(c.passed for c in conds), ratio, cb, conds, path)


def _chatterjea(spec, tf, flags, ratio):
    beta = float(spec.beta)
    conds = _base_conditions(tf, flags, continuous_everywhere=True)
    conds.append(Condition("semimetric continuous", flags.continuous_semimetric, "declared flag"))
    v = tf.evaluator(0.0, beta)
    conds.append(Condition("phi(0, beta) < 1", v < 1.0, f"phi(0, {beta:g}) = {_fmt(v)}"))
    if beta > 0.0:
        inv = psi_inverse(tf, 1.0 / beta)
        conds.append(Condition("psi_inverse(1/beta) > 1", inv > 1.0, f"psi_inverse({_fmt(1.0 / beta)}) = {_fmt(inv)}"))
    conds.append(Condition("step ratio < 1", math.isfinite(ratio), f"ratio = {_fmt(ratio)}"))
    cb, cond = _cbound_condition(tf, ratio)
    conds.append(cond)
    conds = tuple(conds)
    primary = Applicability(all(c.passed for c in conds), ratio, cb, conds, PATH_CHATTERJEA)
    if primary.applicable or tf.family not in (SUM, SCALED_SUM):
        return primary

    # b-metric route: valid without continuity of d, C(ratio) may be unbounded
    K = tf.K if tf.family == SCALED_SUM else 1.0
    bconds = (
        Condition("complete space", flags.complete, "declared flag"),
        Condition("b-metric triangle function", True, tf.describe()),
        Condition("beta < 1/(2K)", beta < 1.0 / (2.0 * K), f"beta = {beta:g}, 1/(2K) = {_fmt(1.0 / (2.0 * K))}"),
    )
    bcb = c_alpha(tf, ratio) if math.isfinite(ratio) else CBoundVerdict(math.inf, 1, "closed_form")
    alt = Applicability(all(c.passed for c in bconds), ratio, bcb, bconds, PATH_CHATTERJEA_BMETRIC)
    if alt.applicable or not flags.continuous_semimetric:
        return alt
    return primary


# -- exact verification on finite spaces ---------------------------------------

_MODES = {BANACH: kernels.BANACH, KANNAN: kernels.KANNAN, CHATTERJEA: kernels.CHATTERJEA}


@dataclass(frozen=True)
class MinimalConstant:
    """Smallest coefficient making the family's inequality hold; inf if none does."""

    value: float
    witness: tuple  # point indices attaining it
    numerator: float
    denominator: float

    def to_json(self, labels=None):
        w = [labels[i] for i in self.witness] if labels else list(self.witness)
        return {"value": self.value if math.isfinite(self.value) else None, "witness": w}


@dataclass(frozen=True)
class FiniteCheck:
    passed: bool
    excess: float  # max of lhs - rhs over the enumerated pairs/triples
    witness: tuple
    minimal: dict  # family -> MinimalConstant


def minimal_constant(fs, T, family):
    """Tight coefficient for ``banach``, ``kannan``, ``chatterjea`` or ``perimeter``."""
    T.check(fs.n)
    if family == PERIMETER:
        v, i, j, k, num, den = kernels.perimeter_constant(fs.d, T.table)
        w = (i, j, k) if i >= 0 else ()
        return MinimalConstant(float(v), w, float(num), float(den))
    if family not in _MODES:
        raise InvalidParameterError(f"no scalar minimal constant for {family!r}")
    v, i, j, num, den = kernels.ratio_constant(fs.d, T.table, _MODES[family])
    w = (i, j) if i >= 0 else ()
    return MinimalConstant(float(v), w, float(num), float(den))


def verify_on_finite(fs, T, spec):
    """Enumerate every pair (or triple) and test ``spec``'s inequality exactly.

    Passes iff every instance holds up to the shared 1e-9 slack.  Also
    reports the minimal constant (for ``crr``: the Banach and Kannan slices).
    """
    T.check(fs.n)
    tol = slack(float(fs.d.max()) if fs.n else 0.0)
    f = spec.family
    if f == CRR:
        e, i, j = kernels.crr_excess(fs.d, T.table, spec.alpha, spec.beta, spec.gamma)
        w = (i, j) if i >= 0 else ()
        minimal = {BANACH: minimal_constant(fs, T, BANACH), KANNAN: minimal_constant(fs, T, KANNAN)}
    else:
        mode = kernels.PERIMETER if f == PERIMETER else _MODES[f]
        c = float(spec.beta if f in (KANNAN, CHATTERJEA) else spec.alpha)
        e, i, j, k = kernels.coefficient_excess(fs.d, T.table, mode, c)
        w = tuple(x for x in (i, j, k) if x >= 0)
        minimal = {f: minimal_constant(fs, T, f)}
    e = float(e)
    return FiniteCheck(e <= tol, e, w, minimal)
