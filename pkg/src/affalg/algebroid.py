"""Affine Lie algebroid data in a single coordinate chart.

Index conventions (all 0-based internally, upper index first):

* ``C[g][a][b]``  structure functions of ``[e_a, e_b] = C[g][a][b] e_g``
* ``C0[b][a]``    structure functions of ``[e0, e_a] = C0[b][a] e_b``
* ``rho[i][a]``   anchor of the vector basis, ``rho(e_a) = rho[i][a] d/dx_i``
* ``lam[i]``      anchor of the reference section, ``lam(e0) = d/dt + lam[i] d/dx_i``

Base coordinates are ``t, x1..xn``; every table entry is a function of
these only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .expr import ZERO, DomainError, Expr, SampleDomain, add_all, as_expr, diff, parse, subs

AFFINE = "affine"
VECTOR = "vector"
AXIOMS = ("derivation", "jacobi", "affine_anchor", "linear_anchor")


class AlgebroidError(ValueError):
    """Malformed algebroid data or incompatible sections."""


def x_names(n: int) -> tuple:
    return tuple(f"x{i}" for i in range(1, n + 1))


def y_names(k: int) -> tuple:
    return tuple(f"y{a}" for a in range(1, k + 1))


def default_domain(n: int, k: int, **kw) -> SampleDomain:
    names = ("t",) + x_names(n) + y_names(k)
    return SampleDomain({v: (-1.0, 1.0) for v in names}, **kw)


def _expr(value, allowed: frozenset, where: str) -> Expr:
    e = parse(value) if isinstance(value, str) else as_expr(value)
    bad = e.free_vars - allowed
    if bad:
        raise AlgebroidError(f"{where} depends on {', '.join(sorted(bad))}; only t and x variables are allowed")
    return e


# ----------------------------------------------------------------- vector fields


@dataclass(frozen=True)
class VectorField:
    """A first-order differential operator sum(c_v d/dv) in named coordinates."""

    coeffs: Mapping[str, Expr] = field(hash=False)

    def __post_init__(self):
        clean = {v: as_expr(c) for v, c in self.coeffs.items()}
        object.__setattr__(self, "coeffs", {v: c for v, c in clean.items() if c is not ZERO})

    def __call__(self, f) -> Expr:
        f = as_expr(f)
        return add_all(c * diff(f, v) for v, c in self.coeffs.items() if v in f.free_vars)

    def coeff(self, v: str) -> Expr:
        return self.coeffs.get(v, ZERO)

    def bracket(self, other: "VectorField") -> "VectorField":
        names = list(self.coeffs) + [v for v in other.coeffs if v not in self.coeffs]
        return VectorField({v: self(other.coeff(v)) - other(self.coeff(v)) for v in names})

    def __sub__(self, other: "VectorField") -> "VectorField":
        names = list(self.coeffs) + [v for v in other.coeffs if v not in self.coeffs]
        return VectorField({v: self.coeff(v) - other.coeff(v) for v in names})

    def __add__(self, other: "VectorField") -> "VectorField":
        names = list(self.coeffs) + [v for v in other.coeffs if v not in self.coeffs]
        return VectorField({v: self.coeff(v) + other.coeff(v) for v in names})

    def components(self, names: Sequence[str]) -> list:
        return [self.coeff(v) for v in names]


# ----------------------------------------------------------------- sections


@dataclass(frozen=True)
class Section:
    """Affine section ``e0 + comps[a] e_a`` or vector section ``comps[a] e_a``."""

    kind: str
    comps: tuple

    def __post_init__(self):
        if self.kind not in (AFFINE, VECTOR):
            raise AlgebroidError(f"unknown section kind {self.kind!r}")
        object.__setattr__(self, "comps", tuple(as_expr(c) for c in self.comps))

    @classmethod
    def affine(cls, comps: Iterable) -> "Section":
        return cls(AFFINE, tuple(comps))

    @classmethod
    def vector(cls, comps: Iterable) -> "Section":
        return cls(VECTOR, tuple(comps))

    @classmethod
    def e0(cls, k: int) -> "Section":
        return cls(AFFINE, (ZERO,) * k)

    @classmethod
    def basis(cls, k: int, a: int) -> "Section":
        """Vector basis section e_a, 0-based."""
        return cls(VECTOR, tuple(1 if b == a else 0 for b in range(k)))

    @classmethod
    def zero(cls, k: int) -> "Section":
        return cls(VECTOR, (ZERO,) * k)

    @property
    def is_affine(self) -> bool:
        return self.kind == AFFINE

    @property
    def k(self) -> int:
        return len(self.comps)

    @property
    def weight(self) -> int:
        """1 on affine sections, 0 on vector sections (the value of e0)."""
        return 1 if self.is_affine else 0

    def _check(self, other: "Section") -> None:
        if self.k != other.k:
            raise AlgebroidError(f"fibre dimension mismatch: {self.k} vs {other.k}")

    def __add__(self, other: "Section") -> "Section":
        self._check(other)
        if self.is_affine and other.is_affine:
            raise AlgebroidError("cannot add two affine sections")
        kind = AFFINE if (self.is_affine or other.is_affine) else VECTOR
        return Section(kind, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other: "Section") -> "Section":
        self._check(other)
        if other.is_affine and not self.is_affine:
            raise AlgebroidError("vector minus affine is not a section")
        kind = AFFINE if (self.is_affine and not other.is_affine) else VECTOR
        return Section(kind, tuple(a - b for a, b in zip(self.comps, other.comps)))

    def __neg__(self) -> "Section":
        if self.is_affine:
            raise AlgebroidError("cannot negate an affine section")
        return Section(VECTOR, tuple(-c for c in self.comps))

    def scale(self, f) -> "Section":
        if self.is_affine:
            raise AlgebroidError("only vector sections can be scaled")
        f = as_expr(f)
        return Section(VECTOR, tuple(f * c for c in self.comps))

    def vector_part(self) -> "Section":
        """Components as a vector section (for affine s this is s - e0)."""
        return Section(VECTOR, self.comps)

    def map(self, fn) -> "Section":
        return Section(self.kind, tuple(fn(c) for c in self.comps))


# ----------------------------------------------------------------- algebroid


@dataclass(frozen=True)
class AffineAlgebroid:
    n: int
    k: int
    C: tuple
    C0: tuple
    lam: tuple
    rho: tuple
    dom: SampleDomain = field(compare=False)

    @property
    def xs(self) -> tuple:
        return x_names(self.n)

    @property
    def ys(self) -> tuple:
        return y_names(self.k)

    @property
    def base_vars(self) -> tuple:
        return ("t",) + self.xs

    def tables(self) -> dict:
        return {"C": self.C, "C0": self.C0, "lam": self.lam, "rho": self.rho}

    # anchors ---------------------------------------------------------

    def rho_field(self, a: int) -> VectorField:
        return VectorField({x: self.rho[i][a] for i, x in enumerate(self.xs)})

    def e0_field(self) -> VectorField:
        coeffs = {"t": 1}
        coeffs.update({x: self.lam[i] for i, x in enumerate(self.xs)})
        return VectorField(coeffs)

    def anchor(self, s: Section) -> VectorField:
        if s.k != self.k:
            raise AlgebroidError(f"section has {s.k} components, algebroid fibre is {self.k}")
        coeffs = {"t": s.weight}
        for i, x in enumerate(self.xs):
            terms = [self.rho[i][a] * c for a, c in enumerate(s.comps)]
            if s.is_affine:
                terms.append(self.lam[i])
            coeffs[x] = add_all(terms)
        return VectorField(coeffs)

    def d_rho(self, a: int, f) -> Expr:
        """rho(e_a)(f)."""
        f = as_expr(f)
        return add_all(self.rho[i][a] * diff(f, x) for i, x in enumerate(self.xs) if x in f.free_vars)

    def d_lam(self, f) -> Expr:
        """lam(e0)(f) = df/dt + lam^i df/dx_i."""
        f = as_expr(f)
        return diff(f, "t") + add_all(self.lam[i] * diff(f, x) for i, x in enumerate(self.xs) if x in f.free_vars)

    # brackets --------------------------------------------------------

    def _vv(self, s: Sequence[Expr], e: Sequence[Expr]) -> list:
        k = self.k
        out = []
        for g in range(k):
            terms = []
            for a in range(k):
                if s[a] is not ZERO:
                    terms.append(s[a] * self.d_rho(a, e[g]))
                if e[a] is not ZERO:
                    terms.append(-e[a] * self.d_rho(a, s[g]))
                for b in range(k):
                    if self.C[g][a][b] is not ZERO and s[a] is not ZERO and e[b] is not ZERO:
                        terms.append(self.C[g][a][b] * s[a] * e[b])
            out.append(add_all(terms))
        return out

    def _av(self, z: Sequence[Expr], s: Sequence[Expr]) -> list:
        """Components of [e0 + z^a e_a, s^b e_b]."""
        vv = self._vv(z, s)
        out = []
        for g in range(self.k):
            terms = [self.d_lam(s[g]), vv[g]]
            terms.extend(self.C0[g][b] * s[b] for b in range(self.k) if s[b] is not ZERO)
            out.append(add_all(terms))
        return out

    def bracket(self, s1: Section, s2: Section) -> Section:
        s1._check(s2)
        if s1.k != self.k:
            raise AlgebroidError(f"section has {s1.k} components, algebroid fibre is {self.k}")
        if s1.is_affine and s2.is_affine:
            return Section.vector(self._av(s1.comps, (s2 - s1).comps))
        if s1.is_affine:
            return Section.vector(self._av(s1.comps, s2.comps))
        if s2.is_affine:
            return Section.vector([-c for c in self._av(s2.comps, s1.comps)])
        return Section.vector(self._vv(s1.comps, s2.comps))

    # axioms ----------------------------------------------------------

    def axiom_exprs(self) -> dict:
        """Residual expressions of the four identities keyed by axiom, each a
        list of (indices, Expr) with 1-based indices."""
        k, n = self.k, self.n
        C, C0, rho, lam = self.C, self.C0, self.rho, self.lam
        out = {name: [] for name in AXIOMS}
        for m in range(k):
            for a, b in combinations(range(k), 2):
                terms = [self.d_lam(C[m][a][b])]
                terms += [C[g][a][b] * C0[m][g] for g in range(k)]
                terms += [-C[m][a][g] * C0[g][b] for g in range(k)]
                terms += [C[m][b][g] * C0[g][a] for g in range(k)]
                terms += [-self.d_rho(a, C0[m][b]), self.d_rho(b, C0[m][a])]
                out["derivation"].append(((m + 1, a + 1, b + 1), add_all(terms)))
            for a, b, c in combinations(range(k), 3):
                terms = []
                for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
                    terms.append(self.d_rho(p, C[m][q][r]))
                    terms += [C[m][p][v] * C[v][q][r] for v in range(k)]
                out["jacobi"].append(((m + 1, a + 1, b + 1, c + 1), add_all(terms)))
        for j in range(n):
            for b in range(k):
                terms = [self.d_lam(rho[j][b]), -self.d_rho(b, lam[j])]
                terms += [-C0[a][b] * rho[j][a] for a in range(k)]
                out["affine_anchor"].append(((j + 1, b + 1), add_all(terms)))
            for a, b in combinations(range(k), 2):
                terms = [self.d_rho(a, rho[j][b]), -self.d_rho(b, rho[j][a])]
                terms += [-C[g][a][b] * rho[j][g] for g in range(k)]
                out["linear_anchor"].append(((j + 1, a + 1, b + 1), add_all(terms)))
        return out

    def with_domain(self, dom: SampleDomain) -> "AffineAlgebroid":
        return AffineAlgebroid(self.n, self.k, self.C, self.C0, self.lam, self.rho, dom)


@dataclass(frozen=True)
class AxiomReport:
    residuals: dict
    worst: dict
    tol: float

    @property
    def passed(self) -> dict:
        return {name: r <= self.tol for name, r in self.residuals.items()}

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "tol": self.tol,
            "axioms": {
                name: {
                    "residual": self.residuals[name],
                    "pass": self.passed[name],
                    "worst_indices": list(self.worst[name]) if self.worst[name] else None,
                }
                for name in AXIOMS
            },
        }


def _grid(value, shape: tuple, name: str):
    if len(shape) == 0:
        return value
    if isinstance(value, str) or not hasattr(value, "__len__") or len(value) != shape[0]:
        raise AlgebroidError(f"{name} must have shape {shape}")
    return tuple(_grid(v, shape[1:], name) for v in value)


def _map_grid(value, fn):
    if isinstance(value, tuple):
        return tuple(_map_grid(v, fn) for v in value)
    return fn(value)


def new_algebroid(n: int, k: int, C=None, C0=None, lam=None, rho=None, dom: SampleDomain | None = None,
                  antisymmetrize: bool = False) -> AffineAlgebroid:
    """Build and validate algebroid data.

    Missing tables default to zero.  Entries may be Exprs, numbers or
    expression strings; they must only involve ``t, x1..xn``.  ``C`` must be
    skew in its lower indices; with ``antisymmetrize=True`` it is replaced by
    its skew part instead of being rejected.
    """
    if n < 0 or k < 0:
        raise AlgebroidError("dimensions must be non-negative")
    C = [[[0] * k for _ in range(k)] for _ in range(k)] if C is None else C
    C0 = [[0] * k for _ in range(k)] if C0 is None else C0
    lam = [0] * n if lam is None else lam
    rho = [[0] * k for _ in range(n)] if rho is None else rho
    allowed = frozenset(("t",) + x_names(n))

    def conv(name):
        def f(v):
            return _expr(v, allowed, name)
        return f

    C = _map_grid(_grid(C, (k, k, k), "C"), conv("C"))
    C0 = _map_grid(_grid(C0, (k, k), "C0"), conv("C0"))
    lam = _map_grid(_grid(lam, (n,), "lam"), conv("lam"))
    rho = _map_grid(_grid(rho, (n, k), "rho"), conv("rho"))
    if dom is None:
        dom = default_domain(n, k)
    elif not dom.covers(allowed):
        missing = sorted(allowed - set(dom.names))
        raise AlgebroidError(f"sample domain lacks intervals for {', '.join(missing)}")

    if antisymmetrize:
        C = tuple(tuple(tuple((C[g][a][b] - C[g][b][a]) * Fraction(1, 2) for b in range(k)) for a in range(k))
                  for g in range(k))
    else:
        bad = []
        for g in range(k):
            for a in range(k):
                for b in range(a, k):
                    s = C[g][a][b] + C[g][b][a]
                    if s is not ZERO:
                        bad.append(((g, a, b), s))
        if bad:
            try:
                r = dom.max_abs([s for _, s in bad])
            except DomainError:
                r = [float("inf")] * len(bad)
            for ((g, a, b), _), res in zip(bad, r):
                if res > dom.tol:
                    raise AlgebroidError(
                        f"C is not skew: C{g + 1}_{a + 1}{b + 1} + C{g + 1}_{b + 1}{a + 1} != 0"
                    )
    return AffineAlgebroid(n, k, C, C0, lam, rho, dom)


def check_axioms(A: AffineAlgebroid, dom: SampleDomain | None = None) -> AxiomReport:
    """Residual (max over indices and samples) of each of the four identities."""
    dom = dom or A.dom
    residuals, worst = {}, {}
    for name, items in A.axiom_exprs().items():
        live = [(idx, e) for idx, e in items if e is not ZERO]
        residuals[name], worst[name] = 0.0, None
        if not live:
            continue
        try:
            vals = dom.max_abs([e for _, e in live])
        except DomainError as err:
            for idx, e in live:
                try:
                    dom.max_abs([e])
                except DomainError as inner:
                    raise DomainError(f"{name} identity at indices {idx}: {inner}", inner.subtree) from inner
            raise err
        best = max(range(len(vals)), key=lambda i: vals[i])
        residuals[name] = vals[best]
        worst[name] = live[best][0]
    return AxiomReport(residuals, worst, dom.tol)


def bracket(A: AffineAlgebroid, s1: Section, s2: Section) -> Section:
    return A.bracket(s1, s2)


def anchor(A: AffineAlgebroid, s: Section) -> VectorField:
    return A.anchor(s)


def sections_equal(s1: Section, s2: Section, dom: SampleDomain) -> tuple:
    """(passed, residual) for componentwise equality of two sections."""
    s1._check(s2)
    if s1.kind != s2.kind:
        return False, float("inf")
    diffs = [a - b for a, b in zip(s1.comps, s2.comps)]
    diffs = [d for d in diffs if d is not ZERO]
    r = max(dom.max_abs(diffs)) if diffs else 0.0
    return r <= dom.tol, r


# ----------------------------------------------------------------- transforms


def _matmul_check(M, N, dom: SampleDomain) -> float:
    k = len(M)
    errs = []
    for a in range(k):
        for b in range(k):
            e = add_all(M[a][c] * N[c][b] for c in range(k)) - (1 if a == b else 0)
            if e is not ZERO:
                errs.append(e)
    return max(dom.max_abs(errs)) if errs else 0.0


def transform_fibre(A: AffineAlgebroid, Amat, B, Ainv, dom: SampleDomain | None = None) -> AffineAlgebroid:
    """Express the algebroid in the new frame ``ebar0 = e0 + B^a e_a``,
    ``e_a = Amat[b][a] ebar_b`` (equivalently ``ebar_b = Ainv[a][b] e_a``).

    ``Ainv`` must be the matrix inverse of ``Amat``; this is verified on the
    sample domain.
    """
    dom = dom or A.dom
    k, n = A.k, A.n
    allowed = frozenset(A.base_vars)
    Amat = _map_grid(_grid(Amat, (k, k), "Amat"), lambda v: _expr(v, allowed, "Amat"))
    Ainv = _map_grid(_grid(Ainv, (k, k), "Ainv"), lambda v: _expr(v, allowed, "Ainv"))
    B = _map_grid(_grid(B, (k,), "B"), lambda v: _expr(v, allowed, "B"))
    r = max(_matmul_check(Amat, Ainv, dom), _matmul_check(Ainv, Amat, dom))
    if r > dom.tol:
        raise AlgebroidError(f"Ainv is not the inverse of Amat (residual {r:.3g})")
    C, C0, rho, lam = A.C, A.C0, A.rho, A.lam

    rho_b = tuple(tuple(add_all(rho[i][a] * Ainv[a][b] for a in range(k)) for b in range(k)) for i in range(n))
    lam_b = tuple(lam[i] - add_all(B[a] * rho_b[i][a] for a in range(k)) for i in range(n))

    # C in the old frame but with the new upper index: K[m][a][b]
    K = [[[add_all([add_all(C[s][a][b] * Amat[m][s] for s in range(k)),
                    -A.d_rho(a, Amat[m][b]), A.d_rho(b, Amat[m][a])])
           for b in range(k)] for a in range(k)] for m in range(k)]
    C_b = tuple(tuple(tuple(add_all(Ainv[a][g] * Ainv[b][v] * K[m][a][b]
                                    for a in range(k) for b in range(k)
                                    if Ainv[a][g] is not ZERO and Ainv[b][v] is not ZERO)
                            for v in range(k)) for g in range(k)) for m in range(k))
    R = [[add_all([add_all(C0[g][b] * Amat[a][g] for g in range(k)),
                   -add_all(C_b[a][g][m] * B[g] * Amat[m][b] for g in range(k) for m in range(k)),
                   -A.d_lam(Amat[a][b]),
                   A.d_rho(b, B[a])])
          for b in range(k)] for a in range(k)]
    C0_b = tuple(tuple(add_all(R[a][b] * Ainv[b][v] for b in range(k)) for v in range(k)) for a in range(k))
    return AffineAlgebroid(n, k, C_b, C0_b, lam_b, rho_b, A.dom)


def inverse_fibre_data(Amat, B, Ainv) -> tuple:
    """Transform data undoing ``transform_fibre(A, Amat, B, Ainv)``."""
    k = len(Amat)
    Binv = [-add_all(as_expr(Ainv[a][g]) * as_expr(B[g]) for g in range(k)) for a in range(k)]
    return Ainv, Binv, Amat


def transform_base(A: AffineAlgebroid, xprime, xprime_inv, dom: SampleDomain | None = None) -> AffineAlgebroid:
    """Change base coordinates ``x' = xprime(t, x)`` with inverse ``x = xprime_inv(t, x')``.

    Both maps are given as Exprs in ``t, x1..xn``; in ``xprime_inv`` the
    symbols ``x_i`` stand for the new coordinates.
    """
    dom = dom or A.dom
    n = A.n
    allowed = frozenset(A.base_vars)
    xp = _map_grid(_grid(xprime, (n,), "xprime"), lambda v: _expr(v, allowed, "xprime"))
    xi = _map_grid(_grid(xprime_inv, (n,), "xprime_inv"), lambda v: _expr(v, allowed, "xprime_inv"))
    fwd = dict(zip(A.xs, xp))
    back = dict(zip(A.xs, xi))
    errs = []
    for i, x in enumerate(A.xs):
        errs.append(subs(xp[i], back) - as_expr(x))
        errs.append(subs(xi[i], fwd) - as_expr(x))
    errs = [e for e in errs if e is not ZERO]
    r = max(dom.max_abs(errs)) if errs else 0.0
    if r > dom.tol:
        raise AlgebroidError(f"xprime_inv is not the inverse of xprime (residual {r:.3g})")

    def pull(e: Expr) -> Expr:
        return subs(e, back)

    rho_p = tuple(tuple(pull(A.d_rho(a, xp[j])) for a in range(A.k)) for j in range(n))
    lam_p = tuple(pull(A.d_lam(xp[j])) for j in range(n))
    C_p = _map_grid(A.C, pull)
    C0_p = _map_grid(A.C0, pull)
    return AffineAlgebroid(n, A.k, C_p, C0_p, lam_p, rho_p, A.dom)


def algebroids_equal(A1: AffineAlgebroid, A2: AffineAlgebroid, dom: SampleDomain | None = None) -> float:
    """Max residual between all tables of two algebroids of equal shape."""
    dom = dom or A1.dom
    if (A1.n, A1.k) != (A2.n, A2.k):
        return float("inf")
    diffs = []

    def walk(a, b):
        if isinstance(a, tuple):
            for u, v in zip(a, b):
                walk(u, v)
        else:
            d = a - b
            if d is not ZERO:
                diffs.append(d)

    for key in ("C", "C0", "lam", "rho"):
        walk(getattr(A1, key), getattr(A2, key))
    return max(dom.max_abs(diffs)) if diffs else 0.0
