import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affalg.algebroid import (AlgebroidError, Section, algebroids_equal, check_axioms, inverse_fibre_data,
                              new_algebroid, sections_equal, transform_base, transform_fibre)
from affalg.examples import jet_algebroid, so3_algebroid, twisted_algebroid
from affalg.expr import ZERO, as_expr, diff, is_zero, parse, var
from affalg.generators import random_base_change, random_fibre_transform, random_poly, random_section


def _same(s1, s2, dom):
    ok, r = sections_equal(s1, s2, dom)
    assert ok, r


def test_valid_examples_pass(valid):
    rep = check_axioms(valid)
    assert rep.ok
    assert all(r <= 1e-9 for r in rep.residuals.values())


def test_broken_examples_fail(broken):
    assert not check_axioms(broken).ok


def test_time_anchor_reports_worst_indices():
    from affalg.examples import time_anchor_algebroid
    rep = check_axioms(time_anchor_algebroid())
    assert rep.residuals["affine_anchor"] >= 0.5
    assert rep.worst["affine_anchor"] == (1, 1)
    assert rep.passed["jacobi"] and rep.passed["linear_anchor"] and rep.passed["derivation"]
    d = rep.as_dict()
    assert d["ok"] is False and d["axioms"]["affine_anchor"]["worst_indices"] == [1, 1]


def test_broken_jacobi_only_jacobi_fails():
    from affalg.examples import broken_jacobi_algebroid
    rep = check_axioms(broken_jacobi_algebroid())
    assert rep.residuals["jacobi"] == pytest.approx(1.0)
    assert [n for n, ok in rep.passed.items() if not ok] == ["jacobi"]


def test_so3_skew_by_enumeration(so3):
    for g in range(3):
        for a in range(3):
            for b in range(3):
                assert so3.C[g][a][b] + so3.C[g][b][a] is ZERO


def test_jet_two_dimensional_is_valid():
    A = new_algebroid(2, 2, rho=[[1, 0], [0, 1]])
    assert check_axioms(A).ok


def test_non_skew_rejected():
    with pytest.raises(AlgebroidError, match="not skew"):
        new_algebroid(0, 1, C=[[[1]]])
    A = new_algebroid(0, 2, C=[[[0, 2], [0, 0]], [[0, 0], [0, 0]]], antisymmetrize=True)
    assert A.C[0][0][1] == as_expr(1) and A.C[0][1][0] == as_expr(-1)


def test_tables_reject_fibre_variables():
    with pytest.raises(AlgebroidError):
        new_algebroid(1, 1, rho=[["y1"]])
    with pytest.raises(AlgebroidError):
        new_algebroid(1, 1, lam=["x2"])


def test_shape_errors():
    with pytest.raises(AlgebroidError):
        new_algebroid(1, 2, rho=[[1]])


def test_anchor_images(twisted):
    X = twisted.anchor(Section.e0(2))
    assert X.coeff("t") == as_expr(1) and X.coeff("x1") == var("t")
    Y = twisted.anchor(Section.vector([1, 0]))
    assert Y.coeff("t") is ZERO and Y.coeff("x1") == as_expr(1)
    Z = twisted.anchor(Section.affine(["x1", 2]))
    assert Z.coeff("x1") == parse("t + x1 + 2*x1")


def test_e0_bracket_gives_C0_column(twisted):
    for a in range(2):
        br = twisted.bracket(Section.e0(2), Section.basis(2, a))
        assert br.comps == tuple(twisted.C0[g][a] for g in range(2))


def test_basis_bracket_gives_C(so3):
    br = so3.bracket(Section.basis(3, 0), Section.basis(3, 1))
    assert br.comps == (ZERO, ZERO, as_expr(1))
    assert not br.is_affine


def test_affine_bracket_uses_difference(twisted):
    z1 = Section.affine(["x1", "t"])
    z2 = Section.affine(["t*x1", 1])
    assert twisted.bracket(z1, z2) == twisted.bracket(z1, z2 - z1)
    assert all(c is ZERO for c in twisted.bracket(z1, z1).comps)


def test_kind_rules():
    z = Section.affine([1, 2])
    s = Section.vector([1, 2])
    assert (z + s).is_affine and not (z - z).is_affine
    with pytest.raises(Exception):
        z + z
    with pytest.raises(Exception):
        z.scale(2)


@pytest.mark.parametrize("make", [jet_algebroid, so3_algebroid, twisted_algebroid])
def test_bracket_antisymmetry_and_leibniz(make):
    A = make()
    rng = np.random.default_rng(3)
    for _ in range(3):
        z = random_section(rng, A, "affine")
        s = random_section(rng, A, "vector")
        t_ = random_section(rng, A, "vector")
        f = random_poly(rng, A.base_vars, 2)
        _same(A.bracket(s, t_), -A.bracket(t_, s), A.dom)
        _same(A.bracket(z, s), -A.bracket(s, z), A.dom)
        _same(A.bracket(s, t_.scale(f)), A.bracket(s, t_).scale(f) + t_.scale(A.anchor(s)(f)), A.dom)
        _same(A.bracket(z, t_.scale(f)), A.bracket(z, t_).scale(f) + t_.scale(A.anchor(z)(f)), A.dom)


@pytest.mark.parametrize("make", [jet_algebroid, so3_algebroid, twisted_algebroid])
def test_anchor_is_homomorphism_on_valid(make):
    A = make()
    rng = np.random.default_rng(4)
    for _ in range(3):
        z1, z2 = random_section(rng, A), random_section(rng, A)
        lhs = A.anchor(A.bracket(z1, z2))
        rhs = A.anchor(z1).bracket(A.anchor(z2))
        for v in A.base_vars:
            assert is_zero(lhs.coeff(v) - rhs.coeff(v), A.dom)[0]


def test_identity_transform_is_exact(twisted):
    I = [[1, 0], [0, 1]]
    out = transform_fibre(twisted, I, [0, 0], I)
    assert out == twisted
    assert algebroids_equal(out, twisted) == 0.0


def test_transform_rule_for_rho(twisted):
    Amat = [[1, "x1"], [0, 1]]
    Ainv = [[1, "-x1"], [0, 1]]
    out = transform_fibre(twisted, Amat, ["t", 1], Ainv)
    # rho^i_a = A^b_a rhobar^i_b
    for a in range(2):
        e = twisted.rho[0][a] - sum((as_expr(parse(str(Amat[b][a]))) * out.rho[0][b] for b in range(2)), ZERO)
        assert is_zero(e, twisted.dom)[0]
    assert check_axioms(out).ok


def test_bad_inverse_rejected(twisted):
    with pytest.raises(AlgebroidError, match="inverse"):
        transform_fibre(twisted, [[1, 1], [0, 1]], [0, 0], [[1, 0], [0, 1]])


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10_000))
def test_random_fibre_transforms_preserve_axioms(seed):
    A = twisted_algebroid()
    Amat, B, Ainv = random_fibre_transform(np.random.default_rng(seed), A)
    out = transform_fibre(A, Amat, B, Ainv)
    assert check_axioms(out).ok
    back = transform_fibre(out, *inverse_fibre_data(Amat, B, Ainv))
    assert algebroids_equal(back, A) <= 1e-9


def test_base_change_preserves_axioms(twisted, rng):
    xp, xi = random_base_change(rng, twisted)
    out = transform_base(twisted, xp, xi)
    assert check_axioms(out).ok
    assert algebroids_equal(transform_base(out, xi, xp), twisted) <= 1e-9


def test_base_change_rules():
    A = jet_algebroid(1)
    out = transform_base(A, ["x1 + t^2"], ["x1 - t^2"])
    assert out.lam[0] == parse("2*t")
    assert out.rho[0][0] == as_expr(1)
    with pytest.raises(AlgebroidError):
        transform_base(A, ["2*x1"], ["x1"])


def test_vector_field_bracket():
    from affalg.algebroid import VectorField
    X = VectorField({"t": 1, "x1": "x1"})
    Y = VectorField({"x1": "t"})
    Z = X.bracket(Y)
    f = parse("x1^2*t")
    assert is_zero(Z(f) - (X(Y(f)) - Y(X(f))), jet_algebroid(1).dom)[0]
    assert diff(f, "t") == parse("x1^2")
