"""The prolonged algebroid over the total space E.

Its base has coordinates ``(t, x1..xn, y1..yk)``; inside the prolonged
AffineAlgebroid the fibre coordinates of E are renamed ``x_{n+1}..x_{n+k}``
so that every tool written for algebroids applies unchanged.  The fibre basis
is ordered ``(X_1..X_k, V_1..V_k)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebroid import AffineAlgebroid, Section, VectorField, new_algebroid, x_names, y_names
from .dynamics import PseudoSode, sode_vector_field
from .expr import ZERO, SampleDomain, as_expr, parse, rename, var
from .generators import random_poly


@dataclass(frozen=True)
class ProlongedAlgebroid:
    algebroid: AffineAlgebroid
    source: AffineAlgebroid

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def k(self) -> int:
        return self.source.k

    @property
    def to_base(self) -> dict:
        """Renaming from E's fibre names to the prolonged base names."""
        return {y: f"x{self.n + a + 1}" for a, y in enumerate(y_names(self.k))}

    @property
    def from_base(self) -> dict:
        return {v: k for k, v in self.to_base.items()}

    def lower(self, e) -> object:
        """Expr over (t, x, y) -> Expr over the prolonged base coordinates."""
        return rename(as_expr(e), self.to_base)

    def lift(self, e) -> object:
        return rename(as_expr(e), self.from_base)

    def lift_field(self, X: VectorField) -> VectorField:
        """A vector field on the prolonged base written in (t, x, y) names."""
        back = self.from_base
        return VectorField({back.get(v, v): self.lift(c) for v, c in X.coeffs.items()})


@dataclass(frozen=True)
class ProlongedSection:
    """``E0 + z^a X_a + Z^a V_a`` (affine) or ``z^a X_a + Z^a V_a`` (vector);
    components are Exprs over ``(t, x, y)``."""

    z: tuple
    Z: tuple
    affine: bool = True

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(parse(c) if isinstance(c, str) else as_expr(c) for c in self.z))
        object.__setattr__(self, "Z", tuple(parse(c) if isinstance(c, str) else as_expr(c) for c in self.Z))

    def to_section(self, P: ProlongedAlgebroid) -> Section:
        comps = [P.lower(c) for c in self.z + self.Z]
        return Section("affine" if self.affine else "vector", tuple(comps))

    @classmethod
    def from_section(cls, P: ProlongedAlgebroid, s: Section) -> "ProlongedSection":
        k = P.k
        comps = [P.lift(c) for c in s.comps]
        return cls(tuple(comps[:k]), tuple(comps[k:]), s.is_affine)


def prolong(A: AffineAlgebroid) -> ProlongedAlgebroid:
    n, k = A.n, A.k
    N, K = n + k, 2 * k
    C = [[[ZERO] * K for _ in range(K)] for _ in range(K)]
    C0 = [[ZERO] * K for _ in range(K)]
    for g in range(k):
        for a in range(k):
            C0[g][a] = A.C0[g][a]
            for b in range(k):
                C[g][a][b] = A.C[g][a][b]
    lam = list(A.lam) + [ZERO] * k
    rho = [[ZERO] * K for _ in range(N)]
    for i in range(n):
        for a in range(k):
            rho[i][a] = A.rho[i][a]
    for a in range(k):
        rho[n + a][k + a] = as_expr(1)
    intervals = {"t": A.dom.intervals.get("t", (-1.0, 1.0))}
    for x in x_names(n):
        intervals[x] = A.dom.intervals.get(x, (-1.0, 1.0))
    for a, y in enumerate(y_names(k)):
        intervals[f"x{n + a + 1}"] = A.dom.intervals.get(y, (-1.0, 1.0))
    for a in range(K):
        intervals[f"y{a + 1}"] = (-1.0, 1.0)
    dom = SampleDomain(intervals, samples=A.dom.samples, tol=A.dom.tol, seed=A.dom.seed, retries=A.dom.retries)
    return ProlongedAlgebroid(new_algebroid(N, K, C, C0, lam, rho, dom), A)


def sode_as_section(G: PseudoSode) -> ProlongedSection:
    """The affine section of the prolongation with z = y and Z = f."""
    ys = tuple(var(y) for y in G.A.ys)
    return ProlongedSection(ys, tuple(G.force_exprs()), True)


def section_field(P: ProlongedAlgebroid, s: ProlongedSection) -> VectorField:
    """Anchor image of a prolonged section as a vector field on E."""
    return P.lift_field(P.algebroid.anchor(s.to_section(P)))


def sode_roundtrip_residual(G: PseudoSode, P: ProlongedAlgebroid | None = None) -> list:
    """Differences (as Exprs) between the anchor image of sode_as_section(G)
    and the vector field of G, in the order (t, x.., y..)."""
    P = P or prolong(G.A)
    image = section_field(P, sode_as_section(G))
    target = sode_vector_field(G)
    return [image.coeff(v) - c for v, c in target.items()] + [
        c for v, c in image.coeffs.items() if v not in target
    ]


# ----------------------------------------------------------------- bracket checks


def _field_residual(X: VectorField, Y: VectorField, dom: SampleDomain) -> float:
    diffs = [c for c in (X - Y).coeffs.values()]
    return max(dom.max_abs(diffs)) if diffs else 0.0


def _section_residual(s1: Section, s2: Section, dom: SampleDomain) -> float:
    diffs = [a - b for a, b in zip(s1.comps, s2.comps)]
    diffs = [d for d in diffs if d is not ZERO]
    return max(dom.max_abs(diffs)) if diffs else 0.0


def prolonged_bracket_check(A: AffineAlgebroid, trials: int = 5, seed: int | None = None,
                            P: ProlongedAlgebroid | None = None) -> dict:
    """Randomised checks of the prolonged bracket against its two projections.

    Residual names:
      anchor_hom   rho1([Z1, Z2]) vs [rho1 Z1, rho1 Z2] for general vector sections
      projection   X-part of [Z1, Z2] vs the source bracket, Z_i projectable
      tpi          t/x part of [rho1 Z1, rho1 Z2] vs rho of the X-part of [Z1, Z2]
      leibniz      [F1 Z1, F2 Z2] vs F1 F2 [Z1, Z2] + F1 rho1(Z1)(F2) Z2 - F2 rho1(Z2)(F1) Z1
      affine_anchor rho1([Z, V]) vs [lam1(Z), rho1(V)] for affine Z
      affine_leibniz [Z, F V] vs F [Z, V] + lam1(Z)(F) V
    """
    P = P or prolong(A)
    B = P.algebroid
    dom = B.dom
    rng = np.random.default_rng(A.dom.seed if seed is None else seed)
    base = A.base_vars
    full = B.base_vars
    k = A.k
    res = {name: 0.0 for name in ("anchor_hom", "projection", "tpi", "leibniz", "affine_anchor", "affine_leibniz")}

    def projectable(kind="vector"):
        z = [random_poly(rng, base, 2) for _ in range(k)]
        Z = [random_poly(rng, full, 2) for _ in range(k)]
        return Section(kind, tuple(z + Z))

    for _ in range(trials):
        Z1, Z2 = projectable(), projectable()
        F1, F2 = random_poly(rng, full, 1), random_poly(rng, full, 1)
        br = B.bracket(Z1, Z2)
        res["anchor_hom"] = max(res["anchor_hom"], _field_residual(B.anchor(br), B.anchor(Z1).bracket(B.anchor(Z2)), dom))
        src = A.bracket(Section.vector(Z1.comps[:k]), Section.vector(Z2.comps[:k]))
        res["projection"] = max(res["projection"], _section_residual(Section.vector(br.comps[:k]), src, dom))
        vf = B.anchor(Z1).bracket(B.anchor(Z2))
        image = A.anchor(Section.vector(br.comps[:k]))
        diffs = [vf.coeff(v) - image.coeff(v) for v in base]
        diffs = [d for d in diffs if d is not ZERO]
        if diffs:
            res["tpi"] = max(res["tpi"], max(dom.max_abs(diffs)))
        lhs = B.bracket(Z1.scale(F1), Z2.scale(F2))
        rhs = (br.scale(F1 * F2) + Z2.scale(F1 * B.anchor(Z1)(F2))) - Z1.scale(F2 * B.anchor(Z2)(F1))
        res["leibniz"] = max(res["leibniz"], _section_residual(lhs, rhs, dom))
        Za = projectable("affine")
        V = projectable()
        F = random_poly(rng, full, 1)
        bv = B.bracket(Za, V)
        res["affine_anchor"] = max(res["affine_anchor"],
                                   _field_residual(B.anchor(bv), B.anchor(Za).bracket(B.anchor(V)), dom))
        lhs = B.bracket(Za, V.scale(F))
        rhs = bv.scale(F) + V.scale(B.anchor(Za)(F))
        res["affine_leibniz"] = max(res["affine_leibniz"], _section_residual(lhs, rhs, dom))
    return {
        "ok": all(r <= dom.tol for r in res.values()),
        "tol": dom.tol,
        "checks": {name: {"residual": r, "pass": r <= dom.tol} for name, r in res.items()},
    }


def basis_brackets(P: ProlongedAlgebroid) -> dict:
    """Brackets of E0, X_a, V_a as prolonged sections (1-based labels)."""
    B = P.algebroid
    k = P.k
    labels = [f"X{a + 1}" for a in range(k)] + [f"V{a + 1}" for a in range(k)]
    basis = {lab: Section.basis(2 * k, i) for i, lab in enumerate(labels)}
    out = {}
    E0 = Section.e0(2 * k)
    for lab, s in basis.items():
        out[("E0", lab)] = ProlongedSection.from_section(P, B.bracket(E0, s))
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            out[(a, b)] = ProlongedSection.from_section(P, B.bracket(basis[a], basis[b]))
    return out
