"""The canonical Poisson bracket on the extended dual bundle.

Coordinates are ``(t, x1..xn, p0, p1..pk)``.  The bracket of two functions is
the bi-derivation built from the coordinate table, so only the table is
stored and antisymmetry is inherited from it.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

from .algebroid import AffineAlgebroid, AlgebroidError, Section
from .expr import ZERO, Expr, SampleDomain, add_all, as_expr, diff, parse, var


def p_names(k: int) -> tuple:
    return tuple(f"p{a}" for a in range(k + 1))


@dataclass(frozen=True)
class PoissonSpace:
    A: AffineAlgebroid

    @property
    def coords(self) -> tuple:
        return ("t",) + self.A.xs + p_names(self.A.k)

    @property
    def dom(self) -> SampleDomain:
        d = self.A.dom.restricted(("t",) + self.A.xs)
        extra = {v: (-1.0, 1.0) for v in ("t",) + self.A.xs if v not in d.intervals}
        extra.update({p: (-1.0, 1.0) for p in p_names(self.A.k)})
        return d.with_intervals(extra)

    def table(self) -> dict:
        """Nonzero coordinate brackets ``{u, v}``, both orders, keyed by name pairs."""
        A = self.A
        ps = [var(p) for p in p_names(A.k)]
        out = {}

        def put(u, v, e):
            if e is not ZERO:
                out[(u, v)] = e
                out[(v, u)] = -e

        put("p0", "t", as_expr(1))
        for i, x in enumerate(A.xs):
            put("p0", x, A.lam[i])
            for a in range(A.k):
                put(f"p{a + 1}", x, A.rho[i][a])
        for b in range(A.k):
            put("p0", f"p{b + 1}", add_all([A.C0[g][b] * ps[g + 1] for g in range(A.k)]))
        for a in range(A.k):
            for b in range(a + 1, A.k):
                put(f"p{a + 1}", f"p{b + 1}", add_all([A.C[g][a][b] * ps[g + 1] for g in range(A.k)]))
        return out

    def entry(self, u: str, v: str) -> Expr:
        return self.table().get((u, v), ZERO)

    def table_text(self) -> dict:
        """Every unordered pair once, momenta first, rendered as text."""
        tab = self.table()
        cs = p_names(self.A.k) + ("t",) + self.A.xs
        return {f"{{{u},{v}}}": str(tab.get((u, v), ZERO))
                for i, u in enumerate(cs) for v in cs[i + 1:]}


def poisson_space(A: AffineAlgebroid) -> PoissonSpace:
    return PoissonSpace(A)


def _check_function(P: PoissonSpace, F, label: str) -> Expr:
    F = parse(F) if isinstance(F, str) else as_expr(F)
    bad = F.free_vars - set(P.coords)
    if bad:
        raise AlgebroidError(f"{label} depends on {', '.join(sorted(bad))}; allowed: {', '.join(P.coords)}")
    return F


def poisson_bracket(P: PoissonSpace, F, G, table: dict | None = None) -> Expr:
    """sum over coordinates u, v of dF/du dG/dv {u, v}."""
    F = _check_function(P, F, "F")
    G = _check_function(P, G, "G")
    tab = P.table() if table is None else table
    dF = {u: diff(F, u) for u in sorted(F.free_vars)}
    dG = {v: diff(G, v) for v in sorted(G.free_vars)}
    terms = []
    for u, fu in dF.items():
        for v, gv in dG.items():
            e = tab.get((u, v))
            if e is not None and fu is not ZERO and gv is not ZERO:
                terms.append(fu * gv * e)
    return add_all(terms)


def hat(P: PoissonSpace, s: Section) -> Expr:
    """The fibrewise linear function of a section: p0 + p_a s^a if affine, p_a s^a if vector."""
    if s.k != P.A.k:
        raise AlgebroidError(f"section has {s.k} components, fibre dimension is {P.A.k}")
    terms = [var(f"p{a + 1}") * c for a, c in enumerate(s.comps)]
    if s.is_affine:
        terms.append(var("p0"))
    return add_all(terms)


def jacobi_expr(P: PoissonSpace, F, G, H) -> Expr:
    tab = P.table()
    br = lambda a, b: poisson_bracket(P, a, b, tab)
    return add_all([br(F, br(G, H)), br(G, br(H, F)), br(H, br(F, G))])


def jacobi_residual(P: PoissonSpace, F, G, H) -> float:
    e = jacobi_expr(P, F, G, H)
    if e is ZERO:
        return 0.0
    return max(P.dom.max_abs([e]))


def coordinate_jacobi(P: PoissonSpace) -> dict:
    """Jacobi residual over every unordered triple of coordinates."""
    worst, worst_triple = 0.0, None
    per = {}
    for triple in combinations_with_replacement(P.coords, 3):
        r = jacobi_residual(P, *triple)
        per[",".join(triple)] = r
        if r > worst:
            worst, worst_triple = r, list(triple)
    return {"residual": worst, "worst": worst_triple, "triples": per}
