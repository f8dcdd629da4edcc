import csv
import io
import json
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from semifix.cli import main

GOLDEN = Path(__file__).parent / "golden"
SCHEMA = json.loads(resources.files("semifix").joinpath("schemas/cli_output.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def check(doc, kind):
    schema = {"$defs": SCHEMA["$defs"], "$ref": f"#/$defs/{kind}"}
    jsonschema.validate(doc, schema)


SOLVE_ARGS = ["solve", "--space", "real_line", "--map", "0.5*x+1", "--family", "banach",
              "--alpha", "0.5", "--x0", "0", "--eps", "1e-6"]


@pytest.mark.parametrize("argv,golden,kind", [
    (["phi", "cbound", "--family", "sum", "--alpha", "0.5"], "phi_cbound_sum.json", "cbound"),
    (SOLVE_ARGS, "solve_real_line.json", "solve"),
    (["lab", "example-6-6", "--format", "json"], "lab_example.json", "classify"),
])
def test_golden_outputs(capsys, argv, golden, kind):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out == (GOLDEN / golden).read_text()
    check(json.loads(out), kind)


def test_cbound_literal(capsys):
    _, out, _ = run(capsys, "phi", "cbound", "--family", "sum", "--alpha", "0.5")
    assert json.loads(out) == {"value": 2.0, "method": "closed_form"}


def test_cbound_unbounded_and_numeric(capsys):
    code, out, _ = run(capsys, "phi", "cbound", "--family", "scaled_sum", "--K", "2", "--alpha", "0.6")
    assert code == 0 and json.loads(out)["value"] is None
    _, out, _ = run(capsys, "phi", "cbound", "--family", "sum", "--alpha", "0.5", "--numeric")
    doc = json.loads(out)
    check(doc, "cbound")
    assert doc["method"] == "numeric_sup" and doc["p_used"] == 64 and abs(doc["value"] - 2) < 1e-12


def test_phi_inverse(capsys):
    code, out, _ = run(capsys, "phi", "inverse", "--family", "max", "--tau", "2")
    assert code == 0 and json.loads(out) == {"value": 2.0}
    check(json.loads(out), "inverse")


def test_solve_values(capsys):
    code, out, _ = run(capsys, *SOLVE_ARGS)
    doc = json.loads(out)
    assert doc["termination"] == "bound_met" and abs(doc["point"] - 2.0) <= 1e-6


def test_solve_trace_csv(capsys, tmp_path):
    path = tmp_path / "trace.csv"
    code, _, _ = run(capsys, *SOLVE_ARGS, "--trace", str(path))
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0] == ["n", "step_dist", "perimeter", "a_priori_bound"] and len(rows) == 23


def test_solve_table_format(capsys):
    code, out, _ = run(capsys, *SOLVE_ARGS, "--format", "table")
    assert code == 0
    lines = dict(line.split(None, 1) for line in out.strip().splitlines())
    assert lines["termination"] == "bound_met" and lines["point"] == "2"


def test_solve_string_space_catalog(capsys):
    code, out, _ = run(capsys, "solve", "--space", "string_ultrametric", "--m", "16", "--catalog", "shift_in_zero",
                       "--family", "banach", "--alpha", "0.5", "--x0", "1" * 16)
    doc = json.loads(out)
    assert code == 0 and doc["point"] == "0" * 16 and doc["termination"] == "fixed_point_exact"


def test_solve_fraction_coefficient(capsys):
    code, out, _ = run(capsys, "solve", "--space", "real_line", "--map", "x/4", "--family", "kannan",
                       "--beta", "1/3", "--x0", "8")
    assert code == 0 and json.loads(out)["applicability"]["step_ratio"] == 0.5


def test_not_applicable_exit_3(capsys):
    code, out, err = run(capsys, "solve", "--space", "real_line", "--map", "0.5*x", "--family", "banach",
                         "--alpha", "0.6", "--x0", "1", "--phi", '{"family": "scaled_sum", "K": 2}')
    assert code == 3
    doc = json.loads(out)
    check(doc, "not_applicable")
    failed = [c["name"] for c in doc["applicability"]["conditions"] if not c["passed"]]
    assert failed == ["Cauchy bound finite at step ratio"]
    e = json.loads(err)
    check(e, "error")
    assert e["error"] == "not_applicable"


def test_non_converged_exit_1(capsys):
    code, out, _ = run(capsys, *SOLVE_ARGS[:-1], "1e-300", "--max-iter", "5")
    assert code == 1 and json.loads(out)["termination"] == "max_iter"


@pytest.mark.parametrize("argv", [
    [],
    ["solve", "--family", "banach", "--alpha", "0.5", "--x0", "0", "--map", "x"],
    ["solve", "--space", "real_line", "--family", "banach", "--alpha", "0.5", "--x0", "0", "--map", "x++1"],
    ["solve", "--space", "real_line", "--family", "banach", "--alpha", "1.5", "--x0", "0", "--map", "x"],
    ["solve", "--space", "string_ultrametric", "--m", "3", "--family", "banach", "--alpha", "0.5",
     "--x0", "000", "--map", "x"],
    ["solve", "--space", "real_line", "--family", "banach", "--alpha", "0.5", "--x0", "zero", "--map", "x"],
    ["phi", "cbound", "--family", "power", "--alpha", "0.5"],
    ["phi", "inverse", "--family", "sum", "--tau", "inf"],
    ["validate", "--input", "/nonexistent.json"],
    ["lab", "audit", "--count", "3", "--models", "hyperbolic"],
])
def test_invalid_input_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    e = json.loads(err.strip().splitlines()[-1])
    check(e, "error")
    assert e["error"] == "invalid_input"


def test_eval_error_reported(capsys):
    code, _, err = run(capsys, "solve", "--space", "real_line", "--map", "1/x", "--family", "banach",
                       "--alpha", "0.5", "--x0", "0")
    assert code == 2 and "division by zero" in err


def _write(tmp_path, doc):
    p = tmp_path / "fs.json"
    p.write_text(json.dumps(doc))
    return str(p)


ONES = {"labels": ["a", "b", "c"], "d": [[0, 1, 1], [1, 0, 1], [1, 1, 0]], "phi": {"family": "sum"}}


def test_validate(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", "--input", _write(tmp_path, ONES))
    assert code == 0 and json.loads(out)["valid"] is True
    check(json.loads(out), "validate")
    bad = dict(ONES, d=[[0, 0, 1], [0, 0, 1], [1, 1, 0]])
    code, out, _ = run(capsys, "validate", "--input", _write(tmp_path, bad))
    doc = json.loads(out)
    assert code == 1 and {"kind": "indiscernible", "i": "a", "j": "b"} in doc["violations"]
    code, _, _ = run(capsys, "validate", "--input", _write(tmp_path, dict(ONES, d=[[0, 1], [1, 0, 1]])))
    assert code == 2


def test_solve_on_finite_input(capsys, tmp_path):
    path = _write(tmp_path, dict(ONES, map=[1, 1, 1]))
    code, out, _ = run(capsys, "solve", "--input", path, "--family", "banach", "--alpha", "0", "--x0", "a")
    doc = json.loads(out)
    assert code == 0 and doc["point"] == "b" and doc["termination"] == "fixed_point_exact"


def test_lab_classify(capsys, tmp_path):
    path = _write(tmp_path, dict(ONES, map=[2, 2, 2]))
    code, out, _ = run(capsys, "lab", "classify", "--input", path, "--crr", "0.1,0.1,1/10")
    doc = json.loads(out)
    check(doc, "classify")
    assert code == 0 and doc["fixed_points"] == ["c"] and doc["banach_alpha_star"] == 0.0
    assert doc["crr"]["feasible"] is True


def test_lab_audit_small(capsys, monkeypatch):
    monkeypatch.setenv("SEMIFIX_SEED", "5")
    code, out, _ = run(capsys, "lab", "audit", "--count", "40", "--n-max", "5")
    doc = json.loads(out)
    check(doc, "audit")
    assert code == 0 and doc["seed"] == 5 and doc["conclusion_violations"] == 0
    code, out2, _ = run(capsys, "lab", "audit", "--count", "40", "--n-max", "5", "--seed", "5", "--workers", "2")
    assert out2 == out


def test_lab_example_table(capsys):
    code, out, _ = run(capsys, "lab", "example-6-6", "--format", "table")
    assert code == 0
    assert "perimeter_alpha_star      0.666667" in out
    assert "period2_detected" in out
