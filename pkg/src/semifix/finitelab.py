"""Brute-force oracle on finite spaces.

Everything here is exhaustive enumeration: fixed points, prime-period-2
points, tight contraction constants, and an audit that checks each
theorem's conclusion whenever its hypotheses hold on an instance.
"""
from __future__ import annotations

import json
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import kernels
from .contractions import (
    BANACH, CHATTERJEA, CRR, KANNAN, PERIMETER,
    Condition, ContractionSpec, applicability, minimal_constant, step_ratio, verify_on_finite,
)
from .errors import AuditViolationError, FormatError, InvalidParameterError
from .solver import FIXED_POINT_EXACT, RESIDUAL, SolveConfig, perimeter_solve, picard_solve
from .spaces import FiniteSpace, SelfMap, check_tr, validate_finite
from .triangle import make_builtin

NO_PERIOD2 = "no prime-period-2 points"
TRIANGLE_OK = "triangle inequality holds"
INEQUALITY_OK = "contraction inequality verified"

MODELS = ("metric", "ultrametric", "bmetric", "generic")


def fixed_points(fs, T):
    T.check(fs.n)
    return [i for i in range(fs.n) if T(i) == i]


def period2_points(fs, T):
    T.check(fs.n)
    return [i for i in range(fs.n) if T(i) != i and T(T(i)) == i]


@dataclass
class AuditRow:
    theorem: str
    spec: ContractionSpec
    theorem_path: str
    hypotheses_met: bool
    conclusion_met: Optional[bool]  # None when the hypotheses fail
    failed_conditions: list
    detail: str = ""

    def to_json(self):
        return {
            "theorem": self.theorem,
            "theorem_path": self.theorem_path,
            "spec": self.spec.to_json(),
            "hypotheses_met": self.hypotheses_met,
            "conclusion_met": self.conclusion_met,
            "failed_conditions": list(self.failed_conditions),
            "detail": self.detail,
        }


@dataclass
class ClassifyReport:
    labels: tuple
    fixed_points: list
    period2_points: list
    minimal_constants: dict  # family -> MinimalConstant
    crr: dict  # {"spec": ContractionSpec, "feasible": bool} or {}
    applicability: dict  # family -> Applicability
    audit: list  # AuditRow
    triangle_ok: bool

    def row(self, theorem):
        for r in self.audit:
            if r.theorem == theorem:
                return r
        return None

    def violations(self):
        return [r for r in self.audit if r.hypotheses_met and r.conclusion_met is False]

    def constant(self, family):
        mc = self.minimal_constants.get(family)
        return None if mc is None else mc.value

    def to_json(self):
        lab = self.labels

        def val(family):
            v = self.constant(family)
            return None if v is None or not math.isfinite(v) else v

        out = {
            "fixed_points": [lab[i] for i in self.fixed_points],
            "period2": [lab[i] for i in self.period2_points],
            "banach_alpha_star": val(BANACH),
            "kannan_beta_star": val(KANNAN),
            "chatterjea_beta_star": val(CHATTERJEA),
            "perimeter_alpha_star": val(PERIMETER),
            "minimal_constants": {f: mc.to_json(lab) for f, mc in self.minimal_constants.items()},
            "crr": {"spec": self.crr["spec"].to_json(), "feasible": self.crr["feasible"]} if self.crr else None,
            "triangle_inequality": self.triangle_ok,
            "applicability": {f: a.to_json() for f, a in self.applicability.items()},
            "audit": [r.to_json() for r in self.audit],
        }
        return out


def _try_spec(factory, *args):
    try:
        return factory(*args)
    except InvalidParameterError:
        return None


def _candidate_specs(fs, T, consts, crr):
    a, k, c = consts[BANACH].value, consts[KANNAN].value, consts[CHATTERJEA].value
    specs = {
        BANACH: _try_spec(ContractionSpec.banach, a) if a < 1.0 else None,
        KANNAN: _try_spec(ContractionSpec.kannan, k) if k < 0.5 else None,
        CHATTERJEA: _try_spec(ContractionSpec.chatterjea, c) if math.isfinite(c) else None,
        PERIMETER: None,
        CRR: None,
    }
    if consts[PERIMETER].value < 1.0:
        specs[PERIMETER] = ContractionSpec.perimeter(consts[PERIMETER].value)
    if crr is not None:
        specs[CRR] = crr
    else:
        # the CRR region is a polytope; try the Banach and Kannan slices
        for cand in (
            _try_spec(ContractionSpec.crr, a, 0.0, 0.0) if a < 1.0 else None,
            _try_spec(ContractionSpec.crr, 0.0, k, k) if 2.0 * k < 1.0 else None,
        ):
            if cand is not None:
                if specs[CRR] is None:
                    specs[CRR] = cand
                if applicability(cand, fs.tf, fs.flags).applicable:
                    specs[CRR] = cand
                    break
    return specs


def _solver_reaches_fixed_point(fs, T, spec, fixed):
    # every orbit on n points enters its cycle within n steps
    dmin = min((fs.d[i, j] for i in range(fs.n) for j in range(fs.n) if i != j), default=1.0)
    cfg = SolveConfig(epsilon=dmin / 2.0, max_iter=fs.n + 1, mode=RESIDUAL)
    for x0 in range(fs.n):
        if spec.family == PERIMETER:
            res = perimeter_solve(fs, T, x0, spec.alpha, cfg)
        else:
            res = picard_solve(fs, T, x0, spec, cfg)
        if res.termination != FIXED_POINT_EXACT or res.point not in fixed:
            return False, f"orbit from {fs.labels[x0]} ended {res.termination} at {fs.labels[res.point]}"
        if res.trace.ratio_violations:
            return False, f"orbit from {fs.labels[x0]} broke the step ratio at n={res.trace.ratio_violations[0]}"
    return True, ""


def _conclusion(fs, T, spec, fixed):
    nfix = len(fixed)
    f = spec.family
    if f in (BANACH, KANNAN, CRR):
        ok, why = nfix == 1, f"{nfix} fixed points, expected exactly 1"
    elif f == CHATTERJEA:
        if spec.beta < 0.5:
            ok, why = nfix == 1, f"{nfix} fixed points, expected exactly 1 (beta < 1/2)"
        else:
            ok, why = nfix >= 1, f"{nfix} fixed points, expected at least 1"
    else:
        ok, why = 1 <= nfix <= 2, f"{nfix} fixed points, expected 1 or 2"
    if not ok:
        return False, why
    return _solver_reaches_fixed_point(fs, T, spec, fixed)


def classify(fs, T, crr=None):
    """Tight constants, per-family applicability and a theorem audit for ``(fs, T)``.

    ``crr`` optionally fixes the CRR coefficients to test; by default the
    Banach slice (a, 0, 0) and Kannan slice (0, b, b) are tried.
    """
    verdict = validate_finite(fs)
    if not verdict.passed:
        raise FormatError(f"not a semimetric space: {list(verdict.violations)[:5]}")
    T.check(fs.n)
    tr = check_tr(fs)
    fixed = fixed_points(fs, T)
    p2 = period2_points(fs, T)
    # with fewer than three points the perimeter constant is vacuously 0;
    # its row still appears and fails on the size condition
    consts = {f: minimal_constant(fs, T, f) for f in (BANACH, KANNAN, CHATTERJEA, PERIMETER)}

    specs = _candidate_specs(fs, T, consts, crr)
    apps, audit, crr_info = {}, [], {}
    tr_cond = Condition(TRIANGLE_OK, tr.passed, f"worst excess {tr.excess:.3g}")
    for family in (BANACH, KANNAN, CHATTERJEA, CRR, PERIMETER):
        spec = specs[family]
        if spec is None or not math.isfinite(step_ratio(spec, fs.tf)):
            continue
        check = verify_on_finite(fs, T, spec)
        extra = [tr_cond, Condition(INEQUALITY_OK, check.passed, f"max excess {check.excess:.3g}")]
        if family == PERIMETER:
            names = ", ".join(fs.labels[i] for i in p2)
            extra.append(Condition(NO_PERIOD2, not p2, f"period-2 points: {names}" if p2 else ""))
        if family == CRR:
            crr_info = {"spec": spec, "feasible": check.passed}
        app = applicability(spec, fs.tf, fs.flags).with_conditions(extra)
        apps[family] = app
        failed = [c.name for c in app.failed()]
        if app.applicable:
            ok, why = _conclusion(fs, T, spec, fixed)
            audit.append(AuditRow(family, spec, app.theorem_path, True, ok, failed, why))
        else:
            audit.append(AuditRow(family, spec, app.theorem_path, False, None, failed))
    return ClassifyReport(fs.labels, fixed, p2, consts, crr_info, apps, audit, tr.passed)


# -- random instances ------------------------------------------------------------

_BMETRIC = re.compile(r"^bmetric(?:\((?P<K>[0-9.eE+-]+)\))?$")


def parse_model(model):
    """``"bmetric(2)"`` -> ``("bmetric", 2.0)``; other names get ``None``."""
    if isinstance(model, tuple):
        return model
    model = str(model).strip()
    m = _BMETRIC.match(model)
    if m:
        K = float(m.group("K")) if m.group("K") else 2.0
        if K < 1.0:
            raise InvalidParameterError("bmetric needs K >= 1")
        return ("bmetric", K)
    if model in ("metric", "ultrametric", "generic"):
        return (model, None)
    raise InvalidParameterError(f"unknown model {model!r}")


def model_name(model):
    kind, K = parse_model(model)
    return f"bmetric({K:g})" if kind == "bmetric" else kind


def _shortest_paths(d):
    d = d.copy()
    n = len(d)
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


def _minimax_paths(d):
    d = d.copy()
    n = len(d)
    for k in range(n):
        d = np.minimum(d, np.maximum(d[:, k : k + 1], d[k : k + 1, :]))
    return d


def random_instance(n, seed, model="metric"):
    """Deterministic random ``(FiniteSpace, SelfMap)`` for ``(n, seed, model)``.

    Raw distances are integers 1..10 (exact in floating point).  Repairs:
    metric by shortest paths, ultrametric by minimax paths, bmetric(K) by
    raising the metric closure to the power ``1 + log2 K`` (a b-metric with
    constant K); generic is left raw and gets the tight ScaledSum constant.
    """
    if not 2 <= n <= 8:
        raise InvalidParameterError("n must lie in 2..8")
    kind, K = parse_model(model)
    rng = np.random.default_rng(seed)
    w = rng.integers(1, 11, size=(n, n)).astype(np.float64)
    w = np.triu(w, 1)
    w = w + w.T
    if kind == "metric":
        d, tf = _shortest_paths(w), make_builtin("sum")
    elif kind == "ultrametric":
        d, tf = _minimax_paths(w), make_builtin("max")
    elif kind == "bmetric":
        d = _shortest_paths(w) ** (1.0 + math.log2(K))
        tf = make_builtin("scaled_sum", K=K)
    else:
        d = w
        tf = make_builtin("scaled_sum", K=max(1.0, kernels.tr_ratio(w)))
    np.fill_diagonal(d, 0.0)
    table = rng.integers(0, n, size=n)
    fs = FiniteSpace([f"p{i}" for i in range(n)], d, tf)
    return fs, SelfMap(table)


def two_cycle_counterexample():
    """Three equidistant points, ``x -> y, y -> x, z -> x``.

    The map contracts perimeters with constant 2/3 yet has no fixed point,
    because ``x`` and ``y`` have prime period 2.
    """
    d = [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]
    fs = FiniteSpace(["x", "y", "z"], d, make_builtin("max"))
    return fs, SelfMap([1, 0, 0])


example_6_6 = two_cycle_counterexample


# -- sweeps ---------------------------------------------------------------------------

@dataclass
class AuditSummary:
    count: int
    n_max: int
    seed: int
    models: list
    per_theorem: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def total_violations(self):
        return len(self.violations)

    def to_json(self):
        return {
            "count": self.count,
            "n_max": self.n_max,
            "seed": self.seed,
            "models": list(self.models),
            "per_theorem": self.per_theorem,
            "conclusion_violations": self.total_violations,
            "independence_witnesses": self.witnesses,
            "violations": self.violations,
        }


def _instance(index, seed, n_max, models):
    ss = np.random.SeedSequence([seed, index])
    rng = np.random.default_rng(ss)
    n = int(rng.integers(2, n_max + 1))
    model = models[index % len(models)]
    return random_instance(n, int(rng.integers(0, 2**63 - 1)), model), model_name(model)


def _audit_one(args):
    index, seed, n_max, models, injected = args
    if injected is not None:
        (fs, T), model = injected, "injected"
    else:
        (fs, T), model = _instance(index, seed, n_max, models)
    rep = classify(fs, T)
    rows = [(r.theorem, r.hypotheses_met, r.conclusion_met, r.detail) for r in rep.audit]
    a, k = rep.constant(BANACH), rep.constant(KANNAN)
    witness = None
    if k < 0.5 and a >= 1.0:
        witness = {"index": index, "model": model, "banach_alpha_star": a if math.isfinite(a) else None,
                   "kannan_beta_star": k}
    repro = None
    if rep.violations():
        repro = fs.to_json(T, seed=seed, model=model, index=index)
    return index, model, rows, witness, repro


def theorem_audit(count, n_max=6, seed=42, models=("metric", "ultrametric", "bmetric(2)", "generic"),
                  *, include_counterexample=False, repro_dir=None, workers=1, raise_on_violation=True):
    """Classify ``count`` random instances and tally every theorem's audit rows.

    Instance ``i`` depends only on ``(seed, i)``, so the summary is
    independent of ``workers``.  Any instance whose hypotheses hold but whose
    conclusion fails is written to ``repro_dir`` (if given) and raised as
    AuditViolationError unless ``raise_on_violation`` is false.
    """
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    if not 2 <= n_max <= 8:
        raise InvalidParameterError("n_max must lie in 2..8")
    models = [model_name(m) for m in models]
    jobs = []
    for i in range(count):
        injected = two_cycle_counterexample() if include_counterexample and i == 0 else None
        jobs.append((i, seed, n_max, models, injected))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_audit_one, jobs, chunksize=max(1, count // (4 * workers))))
    else:
        results = [_audit_one(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    summary = AuditSummary(count, n_max, seed, models)
    per = {f: {"rows": 0, "hypotheses_met": 0, "conclusion_violations": 0}
           for f in (BANACH, KANNAN, CHATTERJEA, CRR, PERIMETER)}
    for index, model, rows, witness, repro in results:
        for theorem, hyp, concl, detail in rows:
            per[theorem]["rows"] += 1
            if hyp:
                per[theorem]["hypotheses_met"] += 1
                if concl is False:
                    per[theorem]["conclusion_violations"] += 1
        if witness is not None:
            summary.witnesses.append(witness)
        if repro is not None:
            path = None
            if repro_dir is not None:
                Path(repro_dir).mkdir(parents=True, exist_ok=True)
                path = os.path.join(repro_dir, f"violation_{seed}_{index}.json")
                with open(path, "w") as fh:
                    json.dump(repro, fh, indent=2)
            summary.violations.append({"index": index, "model": model, "reproduction": repro, "path": path})
    summary.per_theorem = per
    if summary.violations and raise_on_violation:
        first = summary.violations[0]
        raise AuditViolationError(
            f"{summary.total_violations} conclusion violation(s); first at instance {first['index']}",
            first["reproduction"], first["path"],
        )
    return summary
