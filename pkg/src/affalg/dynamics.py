"""Pseudo-second-order dynamics on an affine algebroid.

The equations are ``dt = 1``, ``dx^i = lam^i + rho^i_a y^a``, ``dy^a = f^a``.
Curves are integrated with fixed-step classical RK4.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebroid import AffineAlgebroid, AlgebroidError, Section, x_names, y_names
from .expr import DomainError, add_all, as_expr, evaluate_arrays, lambdify, parse, var


class DynamicsError(ValueError):
    pass


class NumericForce:
    """Force components available only pointwise, from a numeric routine.

    ``fn(t, x, y)`` takes a float and two 1-d arrays and returns an array of
    length k.  Used where a closed-form Expr is not built (large Hessian
    solves); symbolic operations on it raise TypeError.
    """

    def __init__(self, k: int, fn: Callable, label: str = "numeric"):
        self.k = k
        self.fn = fn
        self.label = label

    def __call__(self, t: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(t, x, y), dtype=float)


@dataclass(frozen=True)
class PseudoSode:
    A: AffineAlgebroid
    f: object  # tuple of Expr, or NumericForce

    @property
    def is_symbolic(self) -> bool:
        return not isinstance(self.f, NumericForce)

    def force_exprs(self) -> tuple:
        if not self.is_symbolic:
            raise TypeError(f"force is {self.f.label}; it has no symbolic form")
        return self.f

    def rhs(self) -> Callable:
        """Compiled right-hand side ``(t, x, y) -> (xdot, ydot)``."""
        A = self.A
        names = ("t",) + A.xs + A.ys
        ysyms = [var(y) for y in A.ys]
        xdot = [add_all([A.lam[i]] + [A.rho[i][a] * ysyms[a] for a in range(A.k)]) for i in range(A.n)]
        if self.is_symbolic:
            fn = lambdify(list(xdot) + list(self.f), names)
            n = A.n

            def call(t, x, y):
                out = fn(t, *x, *y)
                return np.array(out[:n], dtype=float), np.array(out[n:], dtype=float)
        else:
            gx = lambdify(xdot, names)
            force = self.f

            def call(t, x, y):
                return np.array(gx(t, *x, *y), dtype=float), force(t, np.asarray(x), np.asarray(y))

        return call


def pseudo_sode(A: AffineAlgebroid, f: Sequence) -> PseudoSode:
    """Build a PseudoSode from k force expressions in ``t, x, y``."""
    if isinstance(f, NumericForce):
        if f.k != A.k:
            raise DynamicsError(f"force has {f.k} components, fibre dimension is {A.k}")
        return PseudoSode(A, f)
    f = tuple(parse(c) if isinstance(c, str) else as_expr(c) for c in f)
    if len(f) != A.k:
        raise DynamicsError(f"force has {len(f)} components, fibre dimension is {A.k}")
    allowed = set(("t",) + A.xs + A.ys)
    for a, c in enumerate(f):
        bad = c.free_vars - allowed
        if bad:
            raise DynamicsError(f"force component {a + 1} depends on {', '.join(sorted(bad))}")
    return PseudoSode(A, f)


def sode_vector_field(G: PseudoSode) -> dict:
    """Coefficients of the vector field on ``(t, x, y)`` as an ordered dict."""
    A = G.A
    ysyms = [var(y) for y in A.ys]
    out = {"t": as_expr(1)}
    for i, x in enumerate(A.xs):
        out[x] = add_all([A.lam[i]] + [A.rho[i][a] * ysyms[a] for a in range(A.k)])
    for a, y in enumerate(A.ys):
        out[y] = G.force_exprs()[a]
    return out


def projection_residual(G: PseudoSode) -> list:
    """Differences between the (t, x) part of the field and the anchor of the
    affine section with components y (should all be the zero Expr)."""
    A = G.A
    field_ = sode_vector_field(G)
    image = A.anchor(Section.affine([var(y) for y in A.ys]))
    return [field_[v] - image.coeff(v) for v in A.base_vars]


# ----------------------------------------------------------------- trajectories


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    x: np.ndarray  # shape (N, n)
    y: np.ndarray  # shape (N, k)
    h: float
    method: str = "rk4"
    names: tuple = field(default=())

    def __post_init__(self):
        if not self.names:
            object.__setattr__(self, "names", ("t",) + x_names(self.x.shape[1]) + y_names(self.y.shape[1]))

    def __len__(self) -> int:
        return len(self.t)

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def k(self) -> int:
        return self.y.shape[1]

    def columns(self) -> dict:
        cols = {"t": self.t}
        for i in range(self.n):
            cols[f"x{i + 1}"] = self.x[:, i]
        for a in range(self.k):
            cols[f"y{a + 1}"] = self.y[:, a]
        return cols

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.names)
        for row in np.column_stack([self.t, self.x, self.y]):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, h: float | None = None) -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise DynamicsError("empty CSV")
        head = [c.strip() for c in rows[0]]
        if not head or head[0] != "t":
            raise DynamicsError("CSV header must start with t")
        n = sum(1 for c in head if c.startswith("x"))
        k = sum(1 for c in head if c.startswith("y"))
        if head != ["t"] + list(x_names(n)) + list(y_names(k)):
            raise DynamicsError(f"unexpected CSV header {head}")
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float).reshape(-1, 1 + n + k)
        if h is None:
            h = float(data[1, 0] - data[0, 0]) if len(data) > 1 else 0.0
        return cls(data[:, 0], data[:, 1:1 + n], data[:, 1 + n:], h, "csv")


def time_grid(t0: float, t1: float, h: float) -> np.ndarray:
    """t0, t0 + h, ... with a final, possibly shorter, step ending at t1."""
    if not h > 0:
        raise DynamicsError("step must be positive")
    if not t1 > t0:
        raise DynamicsError("end time must exceed start time")
    steps = max(1, math.ceil((t1 - t0) / h * (1 - 1e-12)))
    grid = t0 + h * np.arange(steps + 1, dtype=float)
    grid[-1] = t1
    return grid


def integrate(G: PseudoSode, init: Sequence, t1: float, h: float) -> Trajectory:
    """Classical RK4 from ``init = (t0, x0..., y0...)`` (flat or nested) to ``t1``."""
    A = G.A
    flat = []
    for item in init:
        if isinstance(item, (list, tuple, np.ndarray)):
            flat.extend(float(v) for v in item)
        else:
            flat.append(float(item))
    if len(flat) != 1 + A.n + A.k:
        raise DynamicsError(f"initial condition needs {1 + A.n + A.k} numbers (t, x1..x{A.n}, y1..y{A.k})")
    t0 = flat[0]
    x = np.array(flat[1:1 + A.n], dtype=float)
    y = np.array(flat[1 + A.n:], dtype=float)
    grid = time_grid(t0, float(t1), float(h))
    rhs = G.rhs()
    X = np.empty((len(grid), A.n))
    Y = np.empty((len(grid), A.k))
    X[0], Y[0] = x, y
    for j in range(len(grid) - 1):
        t = grid[j]
        dt = grid[j + 1] - t
        try:
            k1x, k1y = rhs(t, x, y)
            k2x, k2y = rhs(t + dt / 2, x + dt / 2 * k1x, y + dt / 2 * k1y)
            k3x, k3y = rhs(t + dt / 2, x + dt / 2 * k2x, y + dt / 2 * k2y)
            k4x, k4y = rhs(t + dt, x + dt * k3x, y + dt * k3y)
        except DomainError as err:
            raise DomainError(f"at t = {t!r}: {err}", err.subtree) from err
        x = x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        y = y + dt / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)
        X[j + 1], Y[j + 1] = x, y
    return Trajectory(grid, X, Y, float(h), "rk4")


def time_derivative(t: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Three-point derivative at interior samples (central difference on a
    uniform grid, exact for quadratics on a non-uniform one)."""
    if len(t) < 3:
        raise DynamicsError("need at least 3 samples")
    h1 = (t[1:-1] - t[:-2])
    h2 = (t[2:] - t[1:-1])
    if values.ndim == 2:
        h1, h2 = h1[:, None], h2[:, None]
    return (h1**2 * values[2:] - h2**2 * values[:-2] + (h2**2 - h1**2) * values[1:-1]) / (h1 * h2 * (h1 + h2))


def _env(A: AffineAlgebroid, traj: Trajectory, sl=slice(None)) -> dict:
    env = {"t": traj.t[sl]}
    for i, x in enumerate(A.xs):
        env[x] = traj.x[sl, i]
    for a, y in enumerate(A.ys):
        env[y] = traj.y[sl, a]
    return env


def _check_shape(A: AffineAlgebroid, traj: Trajectory) -> None:
    if (traj.n, traj.k) != (A.n, A.k):
        raise AlgebroidError(f"trajectory has n={traj.n}, k={traj.k}; algebroid has n={A.n}, k={A.k}")
    if len(traj) < 3:
        raise DynamicsError("trajectory needs at least 3 samples")


def admissibility_residual(A: AffineAlgebroid, traj: Trajectory) -> float:
    """max_i max over interior samples of |dx^i/dt - lam^i - rho^i_a y^a|."""
    _check_shape(A, traj)
    if A.n == 0:
        return 0.0
    inner = slice(1, -1)
    env = _env(A, traj, inner)
    size = len(traj) - 2
    ysyms = [var(y) for y in A.ys]
    target = [add_all([A.lam[i]] + [A.rho[i][a] * ysyms[a] for a in range(A.k)]) for i in range(A.n)]
    vals = np.column_stack(evaluate_arrays(target, env, size))
    xdot = time_derivative(traj.t, traj.x)
    return float(np.max(np.abs(xdot - vals)))
