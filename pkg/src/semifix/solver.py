"""Picard and perimeter iteration with a priori error bounds.

Both solvers stop on the first of: an exact fixed point (``d = 0``), the a
priori bound ``alpha^n C(alpha) d(x0, x1) <= eps`` (or the residual rule),
or ``max_iter``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from ._tol import slack
from .contractions import ContractionSpec, applicability
from .errors import InvalidParameterError, NotApplicableError

APRIORI = "apriori"
RESIDUAL = "residual"

FIXED_POINT_EXACT = "fixed_point_exact"
BOUND_MET = "bound_met"
RESIDUAL_MET = "residual_met"
MAX_ITER = "max_iter"
PERIOD2_DETECTED = "period2_detected"
RATIO_VIOLATED = "ratio_violated"


@dataclass(frozen=True)
class SolveConfig:
    epsilon: float = 1e-9
    max_iter: int = 10_000
    mode: Optional[str] = None  # None: a priori when C(alpha) is finite, else residual
    record_trace: bool = True

    def __post_init__(self):
        if not (self.epsilon > 0.0):
            raise InvalidParameterError("epsilon must be > 0")
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be >= 1")
        if self.mode not in (None, APRIORI, RESIDUAL):
            raise InvalidParameterError(f"unknown mode {self.mode!r}")


@dataclass
class IterationTrace:
    step_dists: list = field(default_factory=list)
    perimeters: Optional[list] = None
    a_priori: Optional[list] = None
    first_point: Any = None
    last_points: list = field(default_factory=list)  # at most three, oldest first
    n_steps: int = 0
    termination: str = ""
    ratio_violations: list = field(default_factory=list)

    def _keep(self, x):
        self.last_points.append(x)
        if len(self.last_points) > 3:
            del self.last_points[0]

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "step_dist", "perimeter", "a_priori_bound"])
        for n, s in enumerate(self.step_dists):
            per = self.perimeters[n] if self.perimeters and n < len(self.perimeters) else ""
            ap = self.a_priori[n] if self.a_priori and n < len(self.a_priori) else ""
            w.writerow([n, repr(s), repr(per) if per != "" else "", repr(ap) if ap != "" else ""])

    def to_csv(self):
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


@dataclass
class FixedPointResult:
    point: Any
    residual: float
    bound_at_stop: Optional[float]
    trace: IterationTrace
    provenance: Any  # Applicability
    mode: str

    @property
    def termination(self):
        return self.trace.termination

    @property
    def n_steps(self):
        return self.trace.n_steps

    def to_json(self, format_point=repr):
        return {
            "point": format_point(self.point),
            "residual": self.residual,
            "termination": self.termination,
            "n_steps": self.n_steps,
            "mode": self.mode,
            "bound_at_stop": self.bound_at_stop,
            "ratio_violations": list(self.trace.ratio_violations),
            "applicability": self.provenance.to_json(),
        }


def error_bound(n, alpha, c, d01):
    """A priori distance to the limit after ``n`` steps: ``alpha^n * c * d01``."""
    if n < 0:
        raise InvalidParameterError("n must be >= 0")
    if not (0.0 <= alpha < 1.0):
        raise InvalidParameterError(f"alpha must lie in [0, 1), got {alpha!r}")
    if not (math.isfinite(c) and c > 0.0):
        raise InvalidParameterError(f"c must be finite and > 0, got {c!r}")
    if not (math.isfinite(d01) and d01 >= 0.0):
        raise InvalidParameterError(f"d01 must be finite and >= 0, got {d01!r}")
    if d01 == 0.0:
        return 0.0
    return alpha**n * c * d01


def picard_iterates(T, x0):
    """Yield ``x0, T(x0), T(T(x0)), ...`` forever."""
    x = x0
    while True:
        yield x
        x = T(x)


def _resolve_mode(cfg, c):
    if cfg.mode is None:
        return APRIORI if math.isfinite(c) else RESIDUAL
    if cfg.mode == APRIORI and not math.isfinite(c):
        raise InvalidParameterError("a priori stopping needs a finite C(alpha); use residual mode")
    return cfg.mode


def picard_solve(space, T, x0, spec: ContractionSpec, cfg: SolveConfig = SolveConfig()):
    """Iterate ``x_{n+1} = T(x_n)`` under the theorem covering ``spec``.

    Raises NotApplicableError (carrying the condition ledger) when a side
    condition fails.  A step that breaks ``d_{n+1} <= ratio * d_n`` is
    recorded in ``trace.ratio_violations`` and disables the a priori rule,
    since the bound no longer holds for this orbit.
    """
    app = applicability(spec, space.tf, space.flags)
    if not app.applicable:
        names = ", ".join(c.name for c in app.failed())
        raise NotApplicableError(f"theorem not applicable: {names}", app)
    ratio = app.step_ratio
    c = app.c_bound.value
    mode = _resolve_mode(cfg, c)
    dist = space.dist

    trace = IterationTrace(a_priori=[] if math.isfinite(c) else None, first_point=x0)
    bound_ok = mode == APRIORI
    d01 = None
    prev = None
    bound = None
    x, n = x0, 0
    while True:
        trace._keep(x)
        y = T(x)
        s = dist(x, y)
        if d01 is None:
            d01 = s
        if math.isfinite(c):
            bound = error_bound(n, ratio, c, d01)
        if cfg.record_trace:
            trace.step_dists.append(s)
            if trace.a_priori is not None:
                trace.a_priori.append(bound)
        if s == 0.0:
            term = FIXED_POINT_EXACT
            break
        if prev is not None and s > ratio * prev + slack(prev, s):
            trace.ratio_violations.append(n)
            bound_ok = False
        if bound_ok and bound <= cfg.epsilon:
            term = BOUND_MET
            break
        if not bound_ok and s <= cfg.epsilon:
            term = RESIDUAL_MET
            break
        if n >= cfg.max_iter:
            term = RATIO_VIOLATED if trace.ratio_violations else MAX_ITER
            break
        prev, x, n = s, y, n + 1
    trace.n_steps = n
    trace.termination = term
    if not cfg.record_trace:
        trace.a_priori = None
    return FixedPointResult(x, s, bound, trace, app, mode)


def perimeter_solve(space, T, x0, alpha, cfg: SolveConfig = SolveConfig()):
    """Iterate a mapping contracting perimeters of triangles.

    Tracks ``p_n = d(x_n, x_{n+1}) + d(x_{n+1}, x_{n+2}) + d(x_{n+2}, x_n)``
    and uses ``d(x_n, x*) <= alpha^n C(alpha) p_0``.  An orbit with
    ``x_{n+2} = x_n != x_{n+1}`` stops with ``period2_detected``: the
    no-period-2 hypothesis fails there and no fixed point is reported.
    """
    spec = ContractionSpec.perimeter(alpha)
    app = applicability(spec, space.tf, space.flags)
    if not app.applicable:
        names = ", ".join(c.name for c in app.failed())
        raise NotApplicableError(f"theorem not applicable: {names}", app)
    ratio = app.step_ratio
    c = app.c_bound.value
    mode = _resolve_mode(cfg, c)
    dist = space.dist

    trace = IterationTrace(perimeters=[], a_priori=[] if math.isfinite(c) else None, first_point=x0)
    bound_ok = mode == APRIORI
    xa = x0
    xb = T(xa)
    xc = T(xb)
    p0 = None
    prev = None
    bound = None
    n = 0
    while True:
        trace._keep(xa)
        s = dist(xa, xb)
        if cfg.record_trace:
            trace.step_dists.append(s)
        if s == 0.0:
            term = FIXED_POINT_EXACT
            break
        if dist(xa, xc) == 0.0:
            term = PERIOD2_DETECTED
            break
        p = s + dist(xb, xc) + dist(xc, xa)
        if p0 is None:
            p0 = p
        if math.isfinite(c):
            bound = error_bound(n, ratio, c, p0)
        if cfg.record_trace:
            trace.perimeters.append(p)
            if trace.a_priori is not None:
                trace.a_priori.append(bound)
        if prev is not None and not (p <= ratio * prev + slack(prev, p) and p < prev):
            trace.ratio_violations.append(n)
            bound_ok = False
        if bound_ok and bound <= cfg.epsilon:
            term = BOUND_MET
            break
        if not bound_ok and s <= cfg.epsilon:
            term = RESIDUAL_MET
            break
        if n >= cfg.max_iter:
            term = RATIO_VIOLATED if trace.ratio_violations else MAX_ITER
            break
        prev, n = p, n + 1
        xa, xb, xc = xb, xc, T(xc)
    trace.n_steps = n
    trace.termination = term
    if not cfg.record_trace:
        trace.a_priori = None
        trace.perimeters = None
    return FixedPointResult(xa, s, bound, trace, app, mode)
