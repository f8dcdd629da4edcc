"""Command-line front end.

Exit codes: 0 success, 1 verification/audit failure or non-convergence,
2 invalid input, 3 theorem not applicable.  Errors are printed to stderr
as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from . import __version__
from .contractions import FAMILIES, PERIMETER, ContractionSpec
from .errors import AuditViolationError, NotApplicableError, SemifixError
from .expr import parse_map
from .finitelab import classify, example_6_6, theorem_audit
from .solver import (
    BOUND_MET, FIXED_POINT_EXACT, RESIDUAL_MET, SolveConfig, perimeter_solve, picard_solve,
)
from .spaces import builtin_space, check_tr, finite_from_json, validate_finite
from .triangle import BUILTIN_FAMILIES, c_alpha, from_json as tf_from_json, make_builtin, psi_inverse

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NOT_APPLICABLE = 0, 1, 2, 3
CONVERGED = (FIXED_POINT_EXACT, BOUND_MET, RESIDUAL_MET)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _fmt_cell(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (dict, list)):
        return json.dumps(v)
    return str(v)


def _emit(obj, fmt="json", out=None):
    out = out or sys.stdout
    obj = _clean(obj)
    if fmt == "table":
        width = max((len(k) for k in obj), default=0)
        for k, v in obj.items():
            out.write(f"{k:<{width}}  {_fmt_cell(v)}\n")
    else:
        out.write(json.dumps(obj) + "\n")


def _error(kind, message, **extra):
    sys.stderr.write(json.dumps(_clean({"error": kind, "message": message, **extra})) + "\n")


def _number(text):
    """Parse a real; ``a/b`` is kept as an exact fraction."""
    try:
        if "/" in text:
            return Fraction(text)
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _default_seed():
    env = os.environ.get("SEMIFIX_SEED")
    if env is None:
        return 42
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"SEMIFIX_SEED must be an integer, got {env!r}")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}")


def _phi_from_args(args):
    return make_builtin(args.family, K=args.K, q=args.q)


# -- subcommands ------------------------------------------------------------------

def cmd_phi_cbound(args):
    tf = _phi_from_args(args)
    _emit(c_alpha(tf, float(args.alpha), p_cap=args.p_cap, numeric=args.numeric).to_json())
    return EXIT_OK


def cmd_phi_inverse(args):
    tf = _phi_from_args(args)
    _emit({"value": psi_inverse(tf, float(args.tau))})
    return EXIT_OK


def _spec_from_args(args):
    kw = {k: getattr(args, k) for k in ("alpha", "beta", "gamma") if getattr(args, k) is not None}
    return ContractionSpec(args.family, **kw)


def cmd_solve(args):
    if args.input:
        space, T = finite_from_json(_load_json(args.input))
        if T is None:
            raise UsageError("finite space file has no 'map'")
        if args.map or args.catalog:
            raise UsageError("--map/--catalog cannot be combined with --input")
    else:
        if not args.space:
            raise UsageError("one of --space or --input is required")
        space = builtin_space(args.space, m=args.m)
        if args.map and args.catalog:
            raise UsageError("give either --map or --catalog")
        if args.map:
            if args.space not in ("real_line", "squared_line"):
                raise UsageError("expression maps apply to real_line and squared_line only")
            T = parse_map(args.map)
        elif args.catalog:
            if args.catalog not in space.catalog:
                raise UsageError(f"unknown catalog map {args.catalog!r}; have {sorted(space.catalog)}")
            T = space.catalog[args.catalog]
        else:
            raise UsageError("a map is required (--map or --catalog)")
    if args.phi:
        try:
            space = space.with_tf(tf_from_json(json.loads(args.phi)))
        except json.JSONDecodeError as exc:
            raise UsageError(f"--phi: invalid JSON: {exc}")
    if args.x0 is None:
        raise UsageError("--x0 is required")
    if space.parse_point is None:
        raise UsageError(f"space {args.space!r} cannot parse points")
    try:
        x0 = space.parse_point(args.x0)
    except ValueError as exc:
        raise UsageError(f"bad --x0: {exc}")
    spec = _spec_from_args(args)
    cfg = SolveConfig(epsilon=args.eps, max_iter=args.max_iter, mode=args.mode)
    if spec.family == PERIMETER:
        res = perimeter_solve(space, T, x0, spec.alpha, cfg)
    else:
        res = picard_solve(space, T, x0, spec, cfg)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            res.trace.write_csv(fh)
    out = res.to_json(space.format_point)
    if args.format == "table":
        out = {k: v for k, v in out.items() if k != "applicability"}
    _emit(out, args.format)
    return EXIT_OK if res.termination in CONVERGED else EXIT_FAIL


def cmd_validate(args):
    fs, _ = finite_from_json(_load_json(args.input))
    v = validate_finite(fs)
    out = {
        "valid": v.passed,
        "violations": [{"kind": k, "i": fs.labels[i], "j": fs.labels[j]} for k, i, j in v.violations],
    }
    ok = v.passed
    if v.passed:
        tr = check_tr(fs)
        out["triangle_inequality"] = {
            "passed": tr.passed,
            "worst": [fs.labels[i] for i in tr.worst],
            "excess": tr.excess,
        }
        ok = tr.passed
    _emit(out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_lab_classify(args):
    fs, T = finite_from_json(_load_json(args.input))
    if T is None:
        raise UsageError("finite space file has no 'map'")
    crr = None
    if args.crr:
        parts = [_number(p) for p in args.crr.split(",")]
        if len(parts) != 3:
            raise UsageError("--crr expects alpha,beta,gamma")
        crr = ContractionSpec.crr(*parts)
    rep = classify(fs, T, crr=crr)
    _emit(rep.to_json())
    return EXIT_FAIL if rep.violations() else EXIT_OK


def cmd_lab_audit(args):
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    summary = theorem_audit(
        args.count, args.n_max, args.seed, models,
        include_counterexample=args.include_example, repro_dir=args.repro_dir,
        workers=args.workers, raise_on_violation=False,
    )
    out = summary.to_json()
    for v in out["violations"]:
        v.pop("reproduction", None)
    _emit(out)
    if summary.violations:
        _error("audit_violation", f"{summary.total_violations} conclusion violation(s)",
               paths=[v["path"] for v in summary.violations])
        return EXIT_FAIL
    return EXIT_OK


def cmd_lab_example(args):
    fs, T = example_6_6()
    rep = classify(fs, T)
    res = perimeter_solve(fs, T, fs.index("z"), rep.constant(PERIMETER), SolveConfig(max_iter=100))
    out = rep.to_json()
    out["perimeter_solve"] = {
        "x0": "z",
        "termination": res.termination,
        "n_steps": res.n_steps,
        "point": fs.labels[res.point],
    }
    if args.format == "table":
        row = rep.row(PERIMETER)
        out = {
            "fixed_points": out["fixed_points"],
            "period2": out["period2"],
            "perimeter_alpha_star": out["perimeter_alpha_star"],
            "perimeter_hypotheses_met": row.hypotheses_met,
            "failed_conditions": row.failed_conditions,
            "perimeter_solve": res.termination,
        }
    _emit(out, args.format)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------

def _add_phi_args(p):
    p.add_argument("--family", required=True, choices=BUILTIN_FAMILIES)
    p.add_argument("--K", type=float, help="scale for scaled_sum (K >= 1)")
    p.add_argument("--q", type=float, help="exponent for power (q > 0)")


def build_parser():
    parser = _Parser(prog="semifix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"semifix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run Picard or perimeter iteration")
    s.add_argument("--space", choices=("real_line", "squared_line", "string_ultrametric"))
    s.add_argument("--m", type=int, help="string length for string_ultrametric")
    s.add_argument("--map", help="map expression in x, e.g. '0.5*x+1'")
    s.add_argument("--catalog", help="name of a built-in map of the space")
    s.add_argument("--input", help="finite space JSON file with a 'map' array")
    s.add_argument("--phi", help="triangle function JSON descriptor overriding the space's")
    s.add_argument("--family", required=True, choices=FAMILIES)
    s.add_argument("--alpha", type=_number)
    s.add_argument("--beta", type=_number)
    s.add_argument("--gamma", type=_number)
    s.add_argument("--x0")
    s.add_argument("--eps", type=float, default=1e-9)
    s.add_argument("--max-iter", type=int, default=10_000)
    s.add_argument("--mode", choices=("apriori", "residual"))
    s.add_argument("--format", choices=("json", "table"), default="json")
    s.add_argument("--trace", help="write the iteration trace to this CSV file")
    s.set_defaults(func=cmd_solve)

    phi = sub.add_parser("phi", help="triangle function utilities")
    phisub = phi.add_subparsers(dest="phi_command", required=True)
    cb = phisub.add_parser("cbound", help="Cauchy constant C(alpha)")
    _add_phi_args(cb)
    cb.add_argument("--alpha", type=float, required=True)
    cb.add_argument("--p-cap", type=int, default=64)
    cb.add_argument("--numeric", action="store_true", help="ignore the closed form")
    cb.set_defaults(func=cmd_phi_cbound)
    inv = phisub.add_parser("inverse", help="generalised inverse of psi(u) = phi(u, 1)")
    _add_phi_args(inv)
    inv.add_argument("--tau", type=float, required=True)
    inv.set_defaults(func=cmd_phi_inverse)

    v = sub.add_parser("validate", help="check a finite space file")
    v.add_argument("--input", required=True)
    v.set_defaults(func=cmd_validate)

    lab = sub.add_parser("lab", help="brute-force oracle on finite spaces")
    labsub = lab.add_subparsers(dest="lab_command", required=True)
    c = labsub.add_parser("classify")
    c.add_argument("--input", required=True)
    c.add_argument("--crr", help="alpha,beta,gamma to test for the CRR family")
    c.set_defaults(func=cmd_lab_classify)
    a = labsub.add_parser("audit")
    a.add_argument("--count", type=int, default=1000)
    a.add_argument("--n-max", type=int, default=6)
    a.add_argument("--seed", type=int, default=None)
    a.add_argument("--models", default="metric,ultrametric,bmetric(2),generic")
    a.add_argument("--repro-dir")
    a.add_argument("--workers", type=int, default=1)
    a.add_argument("--include-example", action="store_true",
                   help="inject the two-cycle counterexample as instance 0")
    a.set_defaults(func=cmd_lab_audit)
    e = labsub.add_parser("example-6-6", help="the two-cycle perimeter counterexample")
    e.add_argument("--format", choices=("json", "table"), default="json")
    e.set_defaults(func=cmd_lab_example)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", "absent") is None:
            args.seed = _default_seed()
        return args.func(args)
    except UsageError as exc:
        _error("invalid_input", str(exc))
        return EXIT_INPUT
    except NotApplicableError as exc:
        ledger = exc.applicability.to_json()
        _emit({"applicable": False, "applicability": ledger})
        _error("not_applicable", str(exc), failed=[c.name for c in exc.applicability.failed()])
        return EXIT_NOT_APPLICABLE
    except AuditViolationError as exc:
        _error("audit_violation", str(exc), path=exc.path)
        return EXIT_FAIL
    except (SemifixError, ValueError) as exc:
        _error("invalid_input", str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
