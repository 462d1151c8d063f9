from fractions import Fraction

import numpy as np
import pytest

from affalg.dynamics import integrate
from affalg.examples import jet_algebroid, so3_algebroid
from affalg.expr import evaluate_arrays, is_zero, parse, var
from affalg.lagrange import Lagrangian, SingularHessianError, energy, lagrange_residual, lagrange_sode

RIGID = "1/2*(y1^2 + 2*y2^2 + 3*y3^2)"


def test_rigid_body_forces(so3):
    G = lagrange_sode(so3, RIGID)
    I = (1, 2, 3)
    y = [var(f"y{a}") for a in (1, 2, 3)]
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        expect = Fraction(I[b] - I[c], I[a]) * y[b] * y[c]
        ok, r = is_zero(G.f[a] - expect, so3.dom)
        assert ok, r
        assert G.f[a] == expect


def test_rigid_body_energy_conserved(so3):
    G = lagrange_sode(so3, RIGID)
    traj = integrate(G, [0, 1, 0.5, 0.2], 1.0, 1e-3)
    E = evaluate_arrays([energy(so3, RIGID)], traj.columns(), len(traj))[0]
    assert np.max(np.abs(E - E[0])) < 1e-9
    assert lagrange_residual(so3, RIGID, traj) < 1e-5


def test_oscillator_on_jet_bundle():
    A = jet_algebroid(1)
    G = lagrange_sode(A, "1/2*y1^2 - 1/2*x1^2")
    assert is_zero(G.f[0] + var("x1"), A.dom)[0]


def test_time_dependent_lagrangian():
    # L = e^t y^2 / 2 gives y' = -y
    A = jet_algebroid(1)
    G = lagrange_sode(A, "1/2*exp(t)*y1^2")
    assert is_zero(G.f[0] + var("y1"), A.dom)[0]


def test_residual_on_twisted(twisted):
    L = "1/2*(y1^2 + y2^2) + x1*y1"
    G = lagrange_sode(twisted, L)
    r = []
    for h in (0.02, 0.01):
        traj = integrate(G, [0, 0.1, 0.2, -0.3], 0.5, h)
        r.append(lagrange_residual(twisted, L, traj))
    assert r[1] < 1e-4
    assert r[0] / r[1] > 3.5


def test_singular_hessian():
    A = jet_algebroid(1)
    with pytest.raises(SingularHessianError) as err:
        lagrange_sode(A, "y1 + x1^2")
    assert err.value.point is not None
    with pytest.raises(SingularHessianError):
        lagrange_sode(jet_algebroid(2), "1/2*(y1 + y2)^2")


def test_large_fibre_uses_numeric_solve():
    A = jet_algebroid(4)
    L = "1/2*(y1^2 + 2*y2^2 + y3^2 + y4^2) - 1/2*x1^2"
    G = lagrange_sode(A, L)
    assert not G.is_symbolic
    with pytest.raises(TypeError):
        G.force_exprs()
    traj = integrate(G, [0, 1, 0, 0, 0, 0, 0, 0, 0], 1.0, 0.01)
    assert abs(traj.x[-1, 0] - np.cos(1)) < 1e-8
    assert lagrange_residual(A, L, traj) < 1e-4


def test_lagrangian_rejects_momenta():
    with pytest.raises(ValueError):
        Lagrangian.of(so3_algebroid(), "p1*y1")


def test_energy_expression(so3):
    assert energy(so3, RIGID) == parse(RIGID)
    assert energy(jet_algebroid(1), "y1^2/2 - x1") == parse("y1^2/2 + x1")


def test_k_zero_is_trivial():
    from affalg.algebroid import new_algebroid
    A = new_algebroid(1, 0, lam=["1"])
    G = lagrange_sode(A, "x1^2")
    assert G.f == ()
