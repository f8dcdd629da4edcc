"""Triangle functions, their axioms, the Cauchy constant C(alpha) and Psi^-1.

A triangle function ``phi`` bounds a semimetric by
``d(x, y) <= phi(d(x, z), d(z, y))``.  Four families are built in:

* ``sum``         phi(u, v) = u + v              (metric spaces)
* ``max``         phi(u, v) = max(u, v)          (ultrametric spaces)
* ``scaled_sum``  phi(u, v) = K (u + v), K >= 1  (b-metric spaces)
* ``power``       phi(u, v) = (u^q + v^q)^(1/q), q > 0

Arbitrary callables can be wrapped with :func:`custom`.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional

import numpy as np

from ._tol import slack
from .errors import DomainError, FormatError, InvalidParameterError

SUM = "sum"
MAX = "max"
SCALED_SUM = "scaled_sum"
POWER = "power"
CUSTOM = "custom"
BUILTIN_FAMILIES = (SUM, MAX, SCALED_SUM, POWER)

UNBOUNDED = math.inf
INFINITE = math.inf

CLOSED_FORM = "closed_form"
NUMERIC_SUP = "numeric_sup"

DEFAULT_P_CAP = 64
UNBOUNDED_LEVEL = 1e12
STALL_FACTOR = 0.999
STALL_STEPS = 8
BRACKET_CAP = 1e18
BISECT_WIDTH = 1e-12


def _sum(u, v):
    return u + v


def _max(u, v):
    return u if u >= v else v


def _scaled_sum(K, u, v):
    return K * (u + v)


def _power(q, u, v):
    # normalised by the larger argument to avoid overflow for large q
    m = u if u >= v else v
    if m == 0.0:
        return 0.0
    return m * ((u / m) ** q + (v / m) ** q) ** (1.0 / q)


def _c_sum(alpha):
    return 1.0 / (1.0 - alpha)


def _c_max(alpha):
    return 1.0


def _c_power(q, alpha):
    return (1.0 - alpha**q) ** (-1.0 / q)


def _c_scaled_sum(K, alpha):
    if alpha * K >= 1.0:
        return UNBOUNDED
    return K / (1.0 - alpha * K)


@dataclass(frozen=True, eq=False)
class TriangleFunction:
    """A symmetric, nondecreasing ``phi`` with ``phi(0, 0) = 0``.

    The boolean flags are *claims*; :func:`check_axioms` tests them on a
    sample, and the contraction checks consume them as stated.
    """

    family: str
    evaluator: Callable[[float, float], float]
    K: Optional[float] = None
    q: Optional[float] = None
    homogeneous: bool = False
    continuous_at_origin: bool = False
    continuous_everywhere: bool = False
    closed_form_c: Optional[Callable[[float], float]] = None
    name: Optional[str] = None

    def __call__(self, u, v):
        return eval_phi(self, u, v)

    @property
    def is_builtin(self):
        return self.family in BUILTIN_FAMILIES

    def describe(self):
        if self.family == SCALED_SUM:
            return f"scaled_sum(K={self.K:g})"
        if self.family == POWER:
            return f"power(q={self.q:g})"
        if self.family == CUSTOM:
            return self.name or CUSTOM
        return self.family

    def to_json(self):
        if not self.is_builtin:
            raise FormatError("custom triangle functions have no JSON descriptor")
        out = {"family": self.family}
        if self.family == SCALED_SUM:
            out["K"] = self.K
        elif self.family == POWER:
            out["q"] = self.q
        return out

    @classmethod
    def from_json(cls, obj):
        return from_json(obj)

    def __repr__(self):
        return f"TriangleFunction({self.describe()})"


def make_builtin(family, K=None, q=None):
    """Return one of the four built-in triangle functions.

    Raises InvalidParameterError for an unknown family, ``K < 1`` or ``q <= 0``.
    """
    family = str(family).lower()
    if family == SUM:
        ev, cf = _sum, _c_sum
    elif family == MAX:
        ev, cf = _max, _c_max
    elif family == SCALED_SUM:
        if K is None or not math.isfinite(K) or K < 1.0:
            raise InvalidParameterError(f"scaled_sum needs finite K >= 1, got {K!r}")
        K = float(K)
        ev, cf = partial(_scaled_sum, K), partial(_c_scaled_sum, K)
    elif family == POWER:
        if q is None or not math.isfinite(q) or q <= 0.0:
            raise InvalidParameterError(f"power needs finite q > 0, got {q!r}")
        q = float(q)
        ev, cf = partial(_power, q), partial(_c_power, q)
    else:
        raise InvalidParameterError(f"unknown triangle family {family!r}")
    return TriangleFunction(
        family=family,
        evaluator=ev,
        K=K if family == SCALED_SUM else None,
        q=q if family == POWER else None,
        homogeneous=True,
        continuous_at_origin=True,
        continuous_everywhere=True,
        closed_form_c=cf,
    )


def custom(evaluator, *, homogeneous=False, continuous_at_origin=False,
           continuous_everywhere=False, name=None):
    """Wrap an arbitrary ``phi(u, v)``; C(alpha) is then estimated numerically."""
    return TriangleFunction(
        family=CUSTOM,
        evaluator=evaluator,
        homogeneous=homogeneous,
        continuous_at_origin=continuous_at_origin or continuous_everywhere,
        continuous_everywhere=continuous_everywhere,
        name=name,
    )


def from_json(obj):
    if not isinstance(obj, dict) or "family" not in obj:
        raise FormatError(f"triangle function descriptor needs a 'family' key: {obj!r}")
    family = obj["family"]
    if family not in BUILTIN_FAMILIES:
        raise FormatError(f"unknown triangle family {family!r}")
    try:
        return make_builtin(family, K=obj.get("K"), q=obj.get("q"))
    except InvalidParameterError as exc:
        raise FormatError(str(exc)) from exc


def _check_arg(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float, np.floating, np.integer)):
        raise DomainError(f"{what} must be a real number, got {x!r}")
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"{what} must be finite and >= 0, got {x!r}")
    return x


def eval_phi(tf, u, v):
    """Evaluate ``tf`` at ``(u, v)``, rejecting negative or non-finite input."""
    u = _check_arg(u, "u")
    v = _check_arg(v, "v")
    r = float(tf.evaluator(u, v))
    if not math.isfinite(r) or r < 0.0:
        raise DomainError(f"{tf.describe()} returned {r!r} at ({u!r}, {v!r})")
    return r


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    u: float
    v: float
    k: float
    detail: str = ""


@dataclass(frozen=True)
class AxiomVerdict:
    passed: bool
    violations: tuple  # first <= 10 AxiomViolation
    counts: dict  # axiom -> number of failing samples
    samples: int


_GRID = np.concatenate(([0.0], np.logspace(-6.0, 6.0, 241)))
_MAX_WITNESSES = 10


def check_axioms(tf, sample_budget=1000, seed=0):
    """Test ``phi(0,0)=0``, symmetry, monotonicity and (if claimed) homogeneity.

    Samples ``(u, v, k)`` from a log-spaced grid on ``[0, 1e6]`` with a
    seeded generator, so the verdict is a deterministic function of
    ``(tf, sample_budget, seed)``.
    """
    if sample_budget < 1:
        raise InvalidParameterError("sample_budget must be >= 1")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(_GRID), size=(sample_budget, 4))
    ev = tf.evaluator
    violations = []
    counts = {}

    def fail(axiom, u, v, k, detail=""):
        counts[axiom] = counts.get(axiom, 0) + 1
        if len(violations) < _MAX_WITNESSES:
            violations.append(AxiomViolation(axiom, u, v, k, detail))

    z = ev(0.0, 0.0)
    if z != 0.0:
        fail("zero", 0.0, 0.0, 1.0, f"phi(0,0)={z!r}")

    for a, b, c, e in idx:
        u, u2, v, k = float(_GRID[a]), float(_GRID[b]), float(_GRID[c]), float(_GRID[e])
        try:
            f_uv = ev(u, v)
            f_vu = ev(v, u)
        except (ArithmeticError, ValueError) as exc:
            fail("evaluation", u, v, k, repr(exc))
            continue
        if not (math.isfinite(f_uv) and f_uv >= 0.0):
            fail("range", u, v, k, f"phi={f_uv!r}")
            continue
        if abs(f_uv - f_vu) > slack(f_uv, f_vu):
            fail("symmetry", u, v, k, f"{f_uv!r} vs {f_vu!r}")
        lo, hi = (u, u2) if u <= u2 else (u2, u)
        f_lo, f_hi = ev(lo, v), ev(hi, v)
        if f_lo > f_hi + slack(f_lo, f_hi):
            fail("monotone", lo, v, hi, f"phi({lo!r},v)={f_lo!r} > phi({hi!r},v)={f_hi!r}")
        if tf.homogeneous:
            lhs = ev(k * u, k * v)
            rhs = k * f_uv
            if abs(lhs - rhs) > 1e-12 * max(abs(lhs), abs(rhs)):
                fail("homogeneity", u, v, k, f"phi(ku,kv)={lhs!r} vs k*phi={rhs!r}")

    return AxiomVerdict(not counts, tuple(violations), counts, sample_budget)


def _check_alpha(alpha):
    alpha = float(alpha)
    if not (0.0 <= alpha < 1.0):
        raise InvalidParameterError(f"alpha must lie in [0, 1), got {alpha!r}")
    return alpha


def nested_bound(tf, alpha, p):
    """``phi(1, phi(alpha, ... phi(alpha^(p-1), alpha^p)))``, folded from the inside."""
    alpha = _check_alpha(alpha)
    if p < 1:
        raise InvalidParameterError("p must be >= 1")
    ev = tf.evaluator
    acc = alpha**p
    for i in range(p - 1, -1, -1):
        acc = ev(alpha**i, acc)
    return float(acc)


@dataclass(frozen=True)
class CBoundVerdict:
    value: float  # math.inf means unbounded
    p_used: int
    method: str

    @property
    def bounded(self):
        return math.isfinite(self.value)

    def to_json(self):
        out = {"value": self.value if self.bounded else None, "method": self.method}
        if self.method == NUMERIC_SUP:
            out["p_used"] = self.p_used
        return out


def c_alpha(tf, alpha, p_cap=DEFAULT_P_CAP, numeric=False):
    """Bound C(alpha) on the nested composition for every depth p.

    Uses the family's closed form when known (unless ``numeric``), otherwise
    the supremum over ``p <= p_cap``.  The numeric path declares the bound
    unbounded once a value exceeds 1e12 or the increments stop shrinking by
    at least a factor 0.999 for 8 consecutive depths.
    """
    alpha = _check_alpha(alpha)
    if p_cap < 1:
        raise InvalidParameterError("p_cap must be >= 1")
    if tf.closed_form_c is not None and not numeric:
        return CBoundVerdict(float(tf.closed_form_c(alpha)), 1, CLOSED_FORM)

    best = 0.0
    prev_val = None
    prev_inc = None
    stalled = 0
    for p in range(1, p_cap + 1):
        val = nested_bound(tf, alpha, p)
        if not math.isfinite(val) or val > UNBOUNDED_LEVEL:
            return CBoundVerdict(UNBOUNDED, p, NUMERIC_SUP)
        best = max(best, val)
        if prev_val is not None:
            inc = val - prev_val
            if prev_inc is not None and inc > 0.0 and inc >= STALL_FACTOR * prev_inc:
                stalled += 1
                if stalled >= STALL_STEPS:
                    return CBoundVerdict(UNBOUNDED, p, NUMERIC_SUP)
            else:
                stalled = 0
            prev_inc = inc
        prev_val = val
    return CBoundVerdict(best, p_cap, NUMERIC_SUP)


def psi(tf, u):
    """``Psi(u) = phi(u, 1)``."""
    return eval_phi(tf, u, 1.0)


def psi_inverse(tf, tau):
    """Generalised inverse ``inf{t >= 0 : Psi(t) >= tau}``; ``math.inf`` if empty."""
    if isinstance(tau, bool) or not math.isfinite(float(tau)) or float(tau) < 0.0:
        raise DomainError(f"tau must be finite and >= 0, got {tau!r}")
    tau = float(tau)
    fam = tf.family
    if fam == MAX:
        return tau if tau > 1.0 else 0.0
    ev = tf.evaluator

    def f(t):
        return ev(t, 1.0)

    if fam == SUM:
        guess = max(tau - 1.0, 0.0)
    elif fam == SCALED_SUM:
        guess = max(tau / tf.K - 1.0, 0.0)
    elif fam == POWER:
        guess = (tau**tf.q - 1.0) ** (1.0 / tf.q) if tau > 1.0 else 0.0
    else:
        guess = _bisect_inverse(f, tau)
        if guess == INFINITE:
            return INFINITE
    return _float_inverse(f, tau, guess)


ULP_WINDOW = 64


def _float_bits(x):
    return struct.unpack("<q", struct.pack("<d", x))[0]


def _bits_float(b):
    return struct.unpack("<d", struct.pack("<q", b))[0]


def _float_inverse(f, tau, guess):
    """Smallest float ``t`` with ``f(t) >= tau``, searched outward from ``guess``.

    This is the generalised inverse of the *computed* psi, so
    ``psi_inverse(psi(t)) <= t`` holds in floating point too; the closed
    forms alone lose it where their slope blows up (power, tau near 1).
    """
    if f(0.0) >= tau:
        return 0.0
    hi, step = guess, max(guess * 2.0**-40, 2.0**-1000)
    while not f(hi) >= tau:
        hi += step
        step *= 2.0
        if hi > BRACKET_CAP:
            return INFINITE
    lo, step = hi, max(hi * 2.0**-40, 2.0**-1000)
    while lo > 0.0 and f(lo) >= tau:
        lo = max(lo - step, 0.0)
        step *= 2.0
    a, b = _float_bits(lo), _float_bits(hi)  # f(lo) < tau <= f(hi)
    while b - a > 1:
        mid = (a + b) // 2
        if f(_bits_float(mid)) >= tau:
            b = mid
        else:
            a = mid
    # the computed psi wobbles by a few ulps where it is not exactly
    # monotone (normalised power form above 1); keep the lowest hit nearby
    for k in range(b - 1, max(b - ULP_WINDOW, 0) - 1, -1):
        if f(_bits_float(k)) >= tau:
            b = k
    return _bits_float(b)


def _bisect_inverse(f, tau):
    if f(0.0) >= tau:
        return 0.0
    lo, hi = 0.0, 1.0
    while f(hi) < tau:
        lo, hi = hi, 2.0 * hi
        if hi > BRACKET_CAP:
            return INFINITE
    while hi - lo > BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) >= tau:
            hi = mid
        else:
            lo = mid
    return lo
