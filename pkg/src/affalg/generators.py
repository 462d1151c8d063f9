"""Seeded random data for property tests and the CLI's random trials."""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from typing import Sequence

import numpy as np

from .algebroid import AffineAlgebroid, Section
from .calculus import Form
from .expr import ONE, ZERO, Expr, add_all, as_expr, mul, var


def monomials(names: Sequence[str], degree: int) -> list:
    out = [ONE]
    for d in range(1, degree + 1):
        for combo in combinations_with_replacement(names, d):
            out.append(mul(*(var(v) for v in combo)))
    return out


def random_poly(rng: np.random.Generator, names: Sequence[str], degree: int = 2,
                density: float = 0.6, scale: int = 3) -> Expr:
    """Polynomial of total degree <= degree with small integer coefficients."""
    terms = []
    for m in monomials(names, degree):
        if rng.random() < density:
            c = int(rng.integers(-scale, scale + 1))
            if c:
                terms.append(c * m)
    return add_all(terms)


def random_section(rng: np.random.Generator, A: AffineAlgebroid, kind: str = "affine", degree: int = 2) -> Section:
    comps = [random_poly(rng, A.base_vars, degree) for _ in range(A.k)]
    return Section(kind, tuple(comps))


def random_form(rng: np.random.Generator, A: AffineAlgebroid, degree: int, poly_degree: int = 2) -> Form:
    coeffs = {}
    for key in combinations(range(A.k + 1), degree):
        coeffs[key] = random_poly(rng, A.base_vars, poly_degree)
    return Form(A.k, degree, coeffs)


def _unitriangular(rng, k: int, names, lower: bool, degree: int) -> list:
    M = [[ONE if i == j else ZERO for j in range(k)] for i in range(k)]
    for i in range(k):
        for j in range(k):
            if (i > j) if lower else (i < j):
                M[i][j] = random_poly(rng, names, degree, density=0.4, scale=2)
    return M


def _invert_unitriangular(M: list, lower: bool) -> list:
    """Exact inverse by substitution; entries stay polynomial."""
    k = len(M)
    inv = [[ZERO] * k for _ in range(k)]
    order = range(k) if lower else range(k - 1, -1, -1)
    for col in range(k):
        x = [ZERO] * k
        for i in order:
            rhs = ONE if i == col else ZERO
            others = [M[i][j] * x[j] for j in range(k) if j != i and M[i][j] is not ZERO]
            x[i] = rhs - add_all(others)
        for i in range(k):
            inv[i][col] = x[i]
    return inv


def _matmul(P: list, Q: list) -> list:
    k = len(P)
    return [[add_all(P[i][m] * Q[m][j] for m in range(k)) for j in range(k)] for i in range(k)]


def random_fibre_transform(rng: np.random.Generator, A: AffineAlgebroid, degree: int = 1) -> tuple:
    """(Amat, B, Ainv) with Amat = D L U invertible everywhere and Ainv exact.

    L, U are unitriangular with polynomial entries and D is a constant
    diagonal with entries in {+-1, +-2}.
    """
    k = A.k
    names = A.base_vars
    L = _unitriangular(rng, k, names, True, degree)
    U = _unitriangular(rng, k, names, False, degree)
    dvals = [int(rng.choice([-2, -1, 1, 2])) for _ in range(k)]
    D = [[as_expr(dvals[i]) if i == j else ZERO for j in range(k)] for i in range(k)]
    Dinv = [[as_expr(Fraction(1, dvals[i])) if i == j else ZERO for j in range(k)] for i in range(k)]
    Amat = _matmul(D, _matmul(L, U))
    Ainv = _matmul(_matmul(_invert_unitriangular(U, False), _invert_unitriangular(L, True)), Dinv)
    B = [random_poly(rng, names, 2) for _ in range(k)]
    return Amat, B, Ainv


def random_base_change(rng: np.random.Generator, A: AffineAlgebroid) -> tuple:
    """(xprime, xprime_inv): a triangular polynomial change of the x's.

    x'_i = x_i + p_i(t, x_1..x_{i-1}); the inverse is built by forward
    substitution so it is exact.
    """
    from .expr import subs

    xs = A.xs
    shifts = [random_poly(rng, ("t",) + xs[:i], 2, density=0.4, scale=2) for i in range(A.n)]
    xprime = [var(x) + s for x, s in zip(xs, shifts)]
    inv: list = []
    for i, x in enumerate(xs):
        back = dict(zip(xs[:i], inv))
        inv.append(var(x) - subs(shifts[i], back))
    return xprime, inv
