import math

import numpy as np
import pytest

from affalg.algebroid import AlgebroidError
from affalg.dynamics import (DynamicsError, NumericForce, Trajectory, admissibility_residual, integrate,
                             projection_residual, pseudo_sode, sode_vector_field, time_derivative, time_grid)
from affalg.examples import jet_algebroid, so3_algebroid
from affalg.expr import ZERO, DomainError, parse


def test_vector_field_layout(twisted):
    G = pseudo_sode(twisted, ["x1", "y1*y2"])
    X = sode_vector_field(G)
    assert list(X) == ["t", "x1", "y1", "y2"]
    assert X["x1"] == parse("t + y1 + x1*y2")
    assert X["y2"] == parse("y1*y2")
    assert all(e is ZERO for e in projection_residual(G))


def test_force_validation(twisted):
    with pytest.raises(DynamicsError):
        pseudo_sode(twisted, ["x1"])
    with pytest.raises(DynamicsError, match="p0"):
        pseudo_sode(twisted, ["p0", "0"])


def test_free_particle_exact():
    A = jet_algebroid(1)
    traj = integrate(pseudo_sode(A, ["0"]), [0, 0, 1], 1.0, 0.1)
    assert traj.x[-1, 0] == pytest.approx(1.0, abs=1e-14)
    assert traj.t[-1] == 1.0


def test_decay_accuracy():
    A = jet_algebroid(1)
    traj = integrate(pseudo_sode(A, ["-y1"]), [0, 0, 1], 1.0, 0.01)
    assert abs(traj.y[-1, 0] - math.exp(-1)) < 1e-9
    assert abs(traj.x[-1, 0] - (1 - math.exp(-1))) < 1e-9


def test_rk4_order():
    A = jet_algebroid(1)
    G = pseudo_sode(A, ["-x1"])
    errs = []
    for h in (0.1, 0.05):
        traj = integrate(G, [0, 1, 0], 1.0, h)
        errs.append(abs(traj.x[-1, 0] - math.cos(1)))
    assert errs[0] / errs[1] > 14


def test_time_dependent_force():
    A = jet_algebroid(1)
    traj = integrate(pseudo_sode(A, ["cos(t)"]), [0, 0, 0], 2.0, 0.01)
    assert abs(traj.y[-1, 0] - math.sin(2.0)) < 1e-9


def test_nested_init_and_errors():
    A = jet_algebroid(2)
    G = pseudo_sode(A, ["0", "0"])
    traj = integrate(G, [0.0, [1, 2], [3, 4]], 0.5, 0.1)
    assert traj.x.shape == (6, 2)
    with pytest.raises(DynamicsError):
        integrate(G, [0, 1, 2, 3], 1, 0.1)
    with pytest.raises(DynamicsError):
        integrate(G, [0, 1, 2, 3, 4], -1, 0.1)
    with pytest.raises(DynamicsError):
        integrate(G, [0, 1, 2, 3, 4], 1, 0)


def test_domain_error_carries_time():
    A = jet_algebroid(1)
    G = pseudo_sode(A, ["1/(1 - t)"])
    with pytest.raises(DomainError, match="t ="):
        integrate(G, [0, 0, 0], 2.0, 0.5)


def test_time_grid_last_step():
    g = time_grid(0.0, 1.0, 0.3)
    assert g[-1] == 1.0 and len(g) == 5
    assert np.allclose(np.diff(g)[:-1], 0.3)
    assert len(time_grid(0.0, 1.0, 0.1)) == 11


def test_time_derivative_exact_on_quadratics():
    t = np.array([0.0, 0.1, 0.3, 0.35, 0.9])
    v = 3 * t ** 2 - t + 2
    assert np.allclose(time_derivative(t, v), 6 * t[1:-1] - 1, atol=1e-12)


def test_csv_roundtrip(twisted):
    G = pseudo_sode(twisted, ["-x1", "y1"])
    traj = integrate(G, [0, 0.5, 0.1, -0.2], 0.2, 0.05)
    text = traj.to_csv()
    assert text.splitlines()[0] == "t,x1,y1,y2"
    back = Trajectory.from_csv(text)
    assert np.array_equal(back.t, traj.t) and np.array_equal(back.x, traj.x) and np.array_equal(back.y, traj.y)


def test_numeric_force():
    A = so3_algebroid()
    f = NumericForce(3, lambda t, x, y: -y)
    traj = integrate(pseudo_sode(A, f), [0, 1, 2, 3], 1.0, 0.01)
    assert np.allclose(traj.y[-1], np.array([1, 2, 3]) * math.exp(-1), atol=1e-9)
    with pytest.raises(TypeError):
        pseudo_sode(A, f).force_exprs()
    with pytest.raises(DynamicsError):
        pseudo_sode(A, NumericForce(2, lambda t, x, y: y))


def test_admissibility_of_integrated_curve_converges():
    A = jet_algebroid(1)
    G = pseudo_sode(A, ["-x1"])
    r = [admissibility_residual(A, integrate(G, [0, 1, 0], 1.0, h)) for h in (0.02, 0.01)]
    assert r[0] / r[1] >= 3.5


def test_admissibility_detects_bad_curve():
    A = jet_algebroid(1)
    t = np.linspace(0, 1, 101)
    traj = Trajectory(t, np.sin(t)[:, None], np.zeros((101, 1)), 0.01)
    assert admissibility_residual(A, traj) > 0.5
    with pytest.raises(AlgebroidError):
        admissibility_residual(jet_algebroid(2), traj)


def test_admissibility_vacuous_without_base():
    A = so3_algebroid()
    traj = integrate(pseudo_sode(A, ["0", "0", "0"]), [0, 1, 1, 1], 0.1, 0.01)
    assert admissibility_residual(A, traj) == 0.0
