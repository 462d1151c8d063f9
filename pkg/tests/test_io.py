import json

import pytest

from affalg.algebroid import Section, check_axioms
from affalg.calculus import Form
from affalg.examples import twisted_algebroid
from affalg.expr import as_expr, parse, var
from affalg.io import (SpecError, dump_spec, form_from_dict, form_to_dict, load_form, load_spec,
                       make_report, check_entry, parse_section, spec_from_dict, spec_to_dict)

JET = {"n": 1, "k": 1, "lambda": ["0"], "rho": [["1"]], "C": [[["0"]]], "C0": [["0"]]}


def write(tmp_path, obj, name="spec.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_load_jet(tmp_path):
    A = load_spec(write(tmp_path, JET))
    assert (A.n, A.k) == (1, 1)
    assert check_axioms(A).ok
    assert A.dom.samples == 64 and A.dom.tol == 1e-9 and A.dom.seed == 0
    assert A.dom.intervals["y1"] == (-1.0, 1.0)


def test_non_skew_rejected(tmp_path):
    bad = dict(JET, C=[[["1"]]])
    with pytest.raises(SpecError, match="skew"):
        load_spec(write(tmp_path, bad))


def test_parse_error_has_location(tmp_path):
    bad = dict(JET, **{"lambda": ["x1 +"]})
    with pytest.raises(SpecError) as err:
        load_spec(write(tmp_path, bad))
    msg = str(err.value)
    assert "spec.json" in msg and "lambda[0]" in msg and "offset 4" in msg


def test_json_error_has_line(tmp_path):
    with pytest.raises(SpecError, match="line 2"):
        load_spec(write(tmp_path, '{"n": 1,\n "k": }'))


@pytest.mark.parametrize("patch, where", [
    ({"rho": [["1", "2"]]}, "rho[0]"),
    ({"n": -1}, "n"),
    ({"domain": {"z": [0, 1]}}, "domain.z"),
    ({"domain": {"t": [1, 0]}}, "domain.t"),
    ({"tol": 0}, "tol"),
    ({"extra": 1}, "extra"),
    ({"rho": [["y1"]]}, "y1"),
])
def test_shape_and_value_errors(tmp_path, patch, where):
    with pytest.raises(SpecError, match=where.replace("[", r"\[").replace("]", r"\]")):
        load_spec(write(tmp_path, dict(JET, **patch)))


def test_missing_file(tmp_path):
    with pytest.raises(SpecError, match="nope.json"):
        load_spec(tmp_path / "nope.json")


def test_spec_round_trip(tmp_path):
    A = twisted_algebroid()
    text = dump_spec(A, tmp_path / "t.json")
    B = load_spec(tmp_path / "t.json")
    assert B == A
    assert json.loads(text) == spec_to_dict(B)


def test_seed_override(tmp_path, monkeypatch):
    p = write(tmp_path, dict(JET, seed=3))
    assert load_spec(p).dom.seed == 3
    monkeypatch.setenv("AFFALG_SEED", "11")
    assert load_spec(p).dom.seed == 11
    assert load_spec(p, seed=5).dom.seed == 5
    monkeypatch.setenv("AFFALG_SEED", "x")
    with pytest.raises(SpecError):
        load_spec(p)


def test_numbers_accepted_as_entries():
    A = spec_from_dict({"n": 1, "k": 1, "rho": [[2]], "lambda": [0.5]})
    assert A.rho[0][0] == as_expr(2) and A.lam[0] == as_expr(0.5)


def test_form_round_trip():
    w = Form.from_tables(3, 2, {(1,): "x1"}, {(1, 3): "t", (2, 3): 2})
    d = form_to_dict(w)
    assert d == {"degree": 2, "coeff0": {"1": "x1"}, "coeffB": {"1,3": "t", "2,3": "2"}}
    assert form_from_dict(d, 3) == w
    assert load_form(json.dumps(d), 3) == w


def test_function_form_json():
    w = form_from_dict({"degree": 0, "coeffB": {"": "t*x1"}}, 2)
    assert w.get(()) == parse("t*x1")


def test_form_json_rejects_noncanonical():
    with pytest.raises(SpecError, match="non-canonical"):
        form_from_dict({"degree": 2, "coeffB": {"2,1": "1"}}, 2)
    with pytest.raises(SpecError):
        form_from_dict({"degree": 1, "coeffB": {"a": "1"}}, 2)


def test_form_file(tmp_path):
    p = write(tmp_path, {"degree": 1, "coeff0": {"": "1"}}, "w.json")
    assert load_form(str(p), 2) == Form.basis(2, (0,))


def test_parse_section():
    s = parse_section("affine: x1, t", 2)
    assert s == Section.affine([var("x1"), var("t")])
    assert not parse_section("vector: 1,0,0", 3).is_affine
    with pytest.raises(SpecError):
        parse_section("affine: 1", 2)
    with pytest.raises(SpecError):
        parse_section("other: 1", 1)


def test_report_flag():
    ok = make_report("x", {"a": check_entry(0.0, 1e-9), "b": check_entry(1e-10, 1e-9)})
    assert ok["ok"]
    bad = make_report("x", {"a": check_entry(0.0, 1e-9), "b": check_entry(1.0, 1e-9)})
    assert not bad["ok"] and not bad["checks"]["b"]["pass"]
    assert "seconds" not in bad["checks"]["a"]
