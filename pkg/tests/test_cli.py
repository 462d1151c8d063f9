import json
import subprocess
import sys

import pytest

from affalg.cli import main
from affalg.io import load_spec

JET = {"n": 1, "k": 1, "lambda": ["0"], "rho": [["1"]], "C": [[["0"]]], "C0": [["0"]]}
EPS = [[["0", "0", "0"], ["0", "0", "1"], ["0", "-1", "0"]],
       [["0", "0", "-1"], ["0", "0", "0"], ["1", "0", "0"]],
       [["0", "1", "0"], ["-1", "0", "0"], ["0", "0", "0"]]]
SO3 = {"n": 0, "k": 3, "C": EPS}
BROKEN = {"n": 1, "k": 1, "rho": [["t"]]}


@pytest.fixture
def specs(tmp_path):
    out = {}
    for name, d in (("jet", JET), ("so3", SO3), ("broken", BROKEN)):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(d))
        out[name] = str(p)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


def test_validate(specs, capsys):
    code, rep, _ = run(capsys, "validate", specs["jet"])
    assert code == 0 and rep["ok"]
    assert set(rep["checks"]) == {"derivation", "jacobi", "affine_anchor", "linear_anchor"}
    code, rep, err = run(capsys, "validate", specs["broken"])
    assert code == 1 and not rep["checks"]["affine_anchor"]["pass"]
    assert "affine_anchor" in err


def test_report_bytes_deterministic(specs, capsys):
    main(["d2check", specs["so3"], "--trials", "3"])
    a = capsys.readouterr().out
    main(["d2check", specs["so3"], "--trials", "3"])
    assert capsys.readouterr().out == a


def test_timing_flag(specs, capsys):
    _, rep, _ = run(capsys, "validate", specs["jet"], "--timing")
    assert any("seconds" in c for c in rep["checks"].values())


def test_d2check(specs, capsys):
    code, rep, _ = run(capsys, "d2check", specs["so3"], "--degree", "1", "--trials", "5")
    assert code == 0 and rep["checks"]["d2"]["residual"] <= 1e-9


def test_bracket(specs, capsys):
    code, rep, _ = run(capsys, "bracket", specs["so3"], "--s1", "vector: 1,0,0", "--s2", "vector: 0,1,0")
    assert code == 0 and rep["bracket"] == {"kind": "vector", "components": ["0", "0", "1"]}


def test_d_and_lie(specs, capsys):
    code, rep, _ = run(capsys, "d", specs["jet"], "--form", '{"degree": 0, "coeffB": {"": "x1"}}')
    assert code == 0 and rep["d"] == {"degree": 1, "coeff0": {}, "coeffB": {"1": "1"}}
    code, rep, _ = run(capsys, "lie", specs["jet"], "--section", "affine: t", "--form",
                       '{"degree": 0, "coeffB": {"": "x1"}}')
    assert code == 0 and rep["lie"]["coeffB"] == {"": "t"}


def test_lagrange(specs, capsys, tmp_path):
    csv = tmp_path / "traj.csv"
    code, rep, _ = run(capsys, "lagrange", specs["so3"], "--L", "0.5*(y1^2+2*y2^2+3*y3^2)",
                       "--init", "0,1,0.5,0.2", "--t1", "1", "--step", "0.001", "--out", str(csv))
    assert code == 0
    assert rep["forces"] == ["-y2*y3", "y1*y3", "-1/3*y1*y2"]
    assert rep["energy_drift"] < 1e-9
    lines = csv.read_text().splitlines()
    assert lines[0] == "t,y1,y2,y3" and len(lines) == 1002


def test_lagrange_singular(specs, capsys):
    code, rep, _ = run(capsys, "lagrange", specs["jet"], "--L", "y1", "--init", "0,0,0", "--t1", "1")
    assert code == 1 and "singular" in rep["error"]


def test_simulate(specs, capsys):
    code, rep, _ = run(capsys, "simulate", specs["jet"], "--force=-x1", "--init", "0,1,0", "--t1", "1",
                       "--step", "0.001")
    assert code == 0 and abs(rep["final"]["x1"] - 0.5403023058681398) < 1e-10
    code, rep, _ = run(capsys, "simulate", specs["jet"], "--force=-x1", "--init", "0,1,0", "--t1", "1",
                       "--step", "0.01", "--residual-tol", "1e-7")
    assert code == 1


def test_prolong_round_trip(specs, capsys, tmp_path):
    out = tmp_path / "p.json"
    code, rep, _ = run(capsys, "prolong", specs["so3"], "--out", str(out))
    assert code == 0 and rep["ok"] and (rep["n"], rep["k"]) == (3, 6)
    code, rep, _ = run(capsys, "validate", str(out))
    assert code == 0
    assert load_spec(out).k == 6


def test_prolong_broken(specs, capsys):
    code, rep, _ = run(capsys, "prolong", specs["broken"])
    assert code == 1 and isinstance(rep["spec"], dict)


def test_poisson(specs, capsys):
    code, rep, _ = run(capsys, "poisson", specs["so3"])
    assert code == 0 and rep["table"]["{p1,p2}"] == "p3"
    code, rep, _ = run(capsys, "poisson", specs["jet"], "--f", "p1", "--g", "x1^2")
    assert rep["bracket"] == "2*x1"
    code, rep, _ = run(capsys, "poisson", specs["broken"], "--jacobi")
    assert code == 1
    code, rep, _ = run(capsys, "poisson", specs["jet"], "--jacobi")
    assert code == 0


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate", "x.json"],
    ["validate", "missing.json"],
    ["d2check", "{jet}", "--trials", "0"],
    ["bracket", "{jet}", "--s1", "affine: 1, 2", "--s2", "affine: 0"],
    ["poisson", "{jet}", "--f", "y1", "--g", "p1"],
    ["poisson", "{jet}", "--f", "p1"],
    ["simulate", "{jet}", "--force", "x1", "--init", "0,1", "--t1", "1"],
    ["d", "{jet}", "--form", '{"degree": 1, "coeffB": {"1": "x1 +"}}'],
    ["validate", "{jet}", "-v"],
])
def test_usage_errors(specs, capsys, argv):
    argv = [a.replace("{jet}", specs["jet"]) for a in argv]
    assert main(argv) == 2
    out, err = capsys.readouterr()
    assert out == "" and err.startswith("affalg:")


def test_parse_error_exit(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(dict(JET, **{"lambda": ["x1 +"]})))
    assert main(["validate", str(p)]) == 2
    assert "offset 4" in capsys.readouterr().err


def test_module_entry_point(specs):
    r = subprocess.run([sys.executable, "-m", "affalg", "validate", specs["jet"]], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["ok"]
