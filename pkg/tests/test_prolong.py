import pytest

from affalg.algebroid import check_axioms
from affalg.dynamics import NumericForce, pseudo_sode
from affalg.examples import bent_anchor_algebroid, jet_algebroid, time_anchor_algebroid
from affalg.expr import ZERO, as_expr, var
from affalg.lagrange import lagrange_sode
from affalg.prolong import (ProlongedSection, basis_brackets, prolong, prolonged_bracket_check, section_field,
                            sode_as_section, sode_roundtrip_residual)


def test_prolonged_shape(twisted):
    P = prolong(twisted)
    B = P.algebroid
    assert (B.n, B.k) == (3, 4)
    assert P.to_base == {"y1": "x2", "y2": "x3"}
    # X_a is anchored like e_a, V_a along d/dy_a
    assert B.rho[0][:2] == twisted.rho[0]
    assert B.rho[1][2] == as_expr(1) and B.rho[2][3] == as_expr(1)
    assert B.lam == twisted.lam + (ZERO, ZERO)


def test_prolongation_of_valid_is_valid(valid):
    assert check_axioms(prolong(valid).algebroid).ok


def test_prolongation_keeps_failures(broken):
    assert not check_axioms(prolong(broken).algebroid).ok


def test_sode_round_trip_is_exact(valid, rng):
    from affalg.generators import random_poly
    names = ("t",) + valid.xs + valid.ys
    G = pseudo_sode(valid, [random_poly(rng, names, 2) for _ in range(valid.k)])
    assert all(e is ZERO for e in sode_roundtrip_residual(G))


def test_sode_section_components(so3):
    G = lagrange_sode(so3, "1/2*(y1^2 + 2*y2^2 + 3*y3^2)")
    s = sode_as_section(G)
    assert s.affine and s.z == (var("y1"), var("y2"), var("y3"))
    assert s.Z == G.f
    X = section_field(prolong(so3), s)
    assert X.coeff("t") == as_expr(1) and X.coeff("y1") == G.f[0]


def test_numeric_force_has_no_section(so3):
    G = pseudo_sode(so3, NumericForce(3, lambda t, x, y: y))
    with pytest.raises(TypeError):
        sode_as_section(G)


def test_section_conversion(twisted):
    P = prolong(twisted)
    s = ProlongedSection(("y1", "x1"), ("t", "y2*x1"))
    back = ProlongedSection.from_section(P, s.to_section(P))
    assert back == s
    assert s.to_section(P).comps[0] == var("x2")


def test_bracket_checks_pass_on_valid(valid):
    rep = prolonged_bracket_check(valid, trials=2)
    assert rep["ok"], rep


def test_bracket_checks_flag_anchor_failures():
    rep = prolonged_bracket_check(time_anchor_algebroid(), trials=2)
    assert not rep["checks"]["affine_anchor"]["pass"]
    rep = prolonged_bracket_check(bent_anchor_algebroid(), trials=2)
    assert not rep["checks"]["anchor_hom"]["pass"]
    assert not rep["checks"]["tpi"]["pass"]
    assert rep["checks"]["projection"]["pass"] and rep["checks"]["leibniz"]["pass"]


def test_basis_brackets_of_jet():
    P = prolong(jet_algebroid(1))
    out = basis_brackets(P)
    assert set(out) == {("E0", "X1"), ("E0", "V1"), ("X1", "V1")}
    assert all(c is ZERO for s in out.values() for c in s.z + s.Z)


def test_basis_brackets_of_so3(so3):
    out = basis_brackets(prolong(so3))
    assert out[("X1", "X2")].z == (ZERO, ZERO, as_expr(1))
    assert all(c is ZERO for c in out[("V1", "V2")].z + out[("V1", "V2")].Z)
