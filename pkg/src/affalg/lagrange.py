"""Lagrange-type equations on an affine algebroid and their pseudo-SODE."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebroid import AffineAlgebroid
from .calculus import _det
from .dynamics import NumericForce, PseudoSode, Trajectory, _check_shape, _env, time_derivative
from .expr import ZERO, Expr, add_all, as_expr, diff, evaluate_arrays, lambdify, parse, var

SINGULAR_RTOL = 1e-10
SYMBOLIC_MAX_K = 3


class SingularHessianError(ValueError):
    def __init__(self, message: str, point: dict | None = None, det: float | None = None):
        super().__init__(message)
        self.point = point
        self.det = det


@dataclass(frozen=True)
class Lagrangian:
    A: AffineAlgebroid
    L: Expr

    @classmethod
    def of(cls, A: AffineAlgebroid, L) -> "Lagrangian":
        L = parse(L) if isinstance(L, str) else as_expr(L)
        bad = L.free_vars - set(("t",) + A.xs + A.ys)
        if bad:
            raise ValueError(f"Lagrangian depends on {', '.join(sorted(bad))}")
        return cls(A, L)

    def momenta(self) -> list:
        return [diff(self.L, y) for y in self.A.ys]

    def hessian(self) -> list:
        p = self.momenta()
        return [[diff(p[a], y) for y in self.A.ys] for a in range(self.A.k)]

    def forces_side(self) -> list:
        """rho^i_a dL/dx^i - (C^g_ab y^b - C^g_a) dL/dy^g, for each a."""
        A, L = self.A, self.L
        p = self.momenta()
        ys = [var(y) for y in A.ys]
        out = []
        for a in range(A.k):
            terms = [A.rho[i][a] * diff(L, x) for i, x in enumerate(A.xs)]
            for g in range(A.k):
                if p[g] is ZERO:
                    continue
                coeff = add_all([A.C[g][a][b] * ys[b] for b in range(A.k)] + [-A.C0[g][a]])
                terms.append(-coeff * p[g])
            out.append(add_all(terms))
        return out

    def rhs(self) -> list:
        """Right-hand side of W f = rhs after expanding the total time derivative."""
        A = self.A
        p = self.momenta()
        ys = [var(y) for y in A.ys]
        vel = [add_all([A.lam[i]] + [A.rho[i][b] * ys[b] for b in range(A.k)]) for i in range(A.n)]
        out = []
        for a, base in enumerate(self.forces_side()):
            terms = [base, -diff(p[a], "t")]
            terms += [-vel[i] * diff(p[a], x) for i, x in enumerate(A.xs)]
            out.append(add_all(terms))
        return out


def _as_lagrangian(A, L) -> Lagrangian:
    return L if isinstance(L, Lagrangian) else Lagrangian.of(A, L)


def _check_regular(lag: Lagrangian, W: list) -> None:
    A = lag.A
    dom = A.dom
    names = ("t",) + A.xs + A.ys
    missing = {v: (-1.0, 1.0) for v in names if v not in dom.intervals}
    if missing:
        dom = dom.with_intervals(missing)
    k = A.k
    flat = [W[a][b] for a in range(k) for b in range(k)]
    pts = dom.points
    vals = evaluate_arrays(flat, {v: pts[v] for v in names}, dom.samples)
    stack = np.stack(vals, axis=1).reshape(dom.samples, k, k)
    dets = np.linalg.det(stack)
    scale = np.max(np.abs(stack), axis=(1, 2))
    ok = np.abs(dets) > SINGULAR_RTOL * scale**k
    ok &= scale > 0
    if not ok.all():
        j = int(np.argmin(np.where(ok, np.inf, np.abs(dets))))
        point = {v: float(pts[v][j]) for v in names}
        raise SingularHessianError(
            f"Hessian d2L/dy2 is singular at {point} (|det W| = {abs(float(dets[j])):.3g})",
            point, abs(float(dets[j])))


def lagrange_sode(A: AffineAlgebroid, L) -> PseudoSode:
    """Solve the Lagrange-type equations for the forces f^a.

    For k <= 3 the Hessian is inverted symbolically by cofactors; above that
    the force is a NumericForce solving the linear system at each point.
    """
    lag = _as_lagrangian(A, L)
    k = A.k
    W = lag.hessian()
    if k == 0:
        return PseudoSode(A, ())
    _check_regular(lag, W)
    rhs = lag.rhs()
    if k <= SYMBOLIC_MAX_K:
        det = _det(W)
        f = []
        for a in range(k):
            # Cramer: replace column a of W by rhs
            M = [[rhs[r] if c == a else W[r][c] for c in range(k)] for r in range(k)]
            f.append(_det(M) / det)
        return PseudoSode(A, tuple(f))
    names = ("t",) + A.xs + A.ys
    flat = [W[a][b] for a in range(k) for b in range(k)] + rhs
    fn = lambdify(flat, names)

    def solve(t, x, y):
        vals = np.asarray(fn(t, *x, *y), dtype=float)
        return np.linalg.solve(vals[:k * k].reshape(k, k), vals[k * k:])

    return PseudoSode(A, NumericForce(k, solve, "numeric Hessian solve"))


def lagrange_residual(A: AffineAlgebroid, L, traj: Trajectory) -> float:
    """Max over interior samples of the Lagrange-type equations' defect,
    with the total time derivative of dL/dy taken by finite differences."""
    lag = _as_lagrangian(A, L)
    _check_shape(A, traj)
    if A.k == 0:
        return 0.0
    p = lag.momenta()
    side = lag.forces_side()
    pvals = np.column_stack(evaluate_arrays(p, _env(A, traj), len(traj)))
    svals = np.column_stack(evaluate_arrays(side, _env(A, traj, slice(1, -1)), len(traj) - 2))
    return float(np.max(np.abs(time_derivative(traj.t, pvals) - svals)))


def energy(A: AffineAlgebroid, L) -> Expr:
    """y^a dL/dy^a - L."""
    lag = _as_lagrangian(A, L)
    return add_all([var(y) * p for y, p in zip(A.ys, lag.momenta())] + [-lag.L])
