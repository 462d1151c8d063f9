"""Exterior calculus of forms on affine sections.

A form of degree K is stored on the extended coframe ``(e^0, e^1, ..., e^k)``:
``coeffs`` maps strictly increasing index tuples over ``0..k`` to Exprs, the
index 0 standing for ``e^0``.  So ``coeffs[(0, m1, ..)]`` is the table
``omega_{0 m1 ..}`` and ``coeffs[(m1, .., mK)]`` is ``omega_{m1 .. mK}``, with
fibre indices 1-based as in the usual notation.

A section enters evaluation through its extended components: ``e^0`` takes
the value 1 on an affine section and 0 on a vector section, ``e^a`` reads
component ``a``.  With that, a form acts on K sections as the alternating sum
of coefficient-weighted minors, which is the fast path used internally
(``form_value``).  ``eval_form`` instead follows the reference-section
construction step by step and serves as its cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Mapping, Sequence, Union

from .algebroid import AffineAlgebroid, Section
from .expr import ZERO, Expr, SampleDomain, add_all, as_expr, parse


class FormError(ValueError):
    pass


def canonical(idx: Sequence[int]) -> tuple:
    """(sign, sorted tuple) by insertion sort; sign 0 on a repeated index."""
    items = list(idx)
    sign = 1
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(items, items[1:]):
        if a == b:
            return 0, None
    return sign, tuple(items)


def _coerce(value) -> Expr:
    return parse(value) if isinstance(value, str) else as_expr(value)


@dataclass(frozen=True)
class Form:
    """Degree-K form on affine sections of a rank-k affine bundle."""

    k: int
    degree: int
    coeffs: Mapping[tuple, Expr] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.degree < 0:
            raise FormError("negative degree")
        clean = {}
        for key, val in self.coeffs.items():
            key = tuple(key)
            if len(key) != self.degree:
                raise FormError(f"index {key} does not match degree {self.degree}")
            if any(not 0 <= i <= self.k for i in key):
                raise FormError(f"index {key} out of range 0..{self.k}")
            sign, ckey = canonical(key)
            if ckey != key:
                raise FormError(f"non-canonical index {key}")
            e = _coerce(val)
            if e is not ZERO:
                clean[key] = e
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    # construction ----------------------------------------------------

    @classmethod
    def zero(cls, k: int, degree: int) -> "Form":
        return cls(k, degree, {})

    @classmethod
    def function(cls, k: int, f) -> "Form":
        return cls(k, 0, {(): f})

    @classmethod
    def basis(cls, k: int, idx: Sequence[int], coeff=1) -> "Form":
        """coeff * e^{i1} ^ ... ^ e^{iK} for extended indices (0 is e^0)."""
        sign, key = canonical(idx)
        if sign == 0:
            return cls.zero(k, len(idx))
        return cls(k, len(idx), {key: sign * _coerce(coeff)})

    @classmethod
    def from_tables(cls, k: int, degree: int, coeff0: Mapping | None = None,
                    coeffB: Mapping | None = None) -> "Form":
        """Build from the ``omega_{0 m..}`` and ``omega_{m..}`` tables (canonical 1-based keys)."""
        coeffs = {}
        for key, val in (coeff0 or {}).items():
            key = tuple(key)
            if len(key) != degree - 1 or any(i < 1 for i in key):
                raise FormError(f"bad e0-table index {key} for degree {degree}")
            coeffs[(0,) + key] = val
        for key, val in (coeffB or {}).items():
            key = tuple(key)
            if len(key) != degree or any(i < 1 for i in key):
                raise FormError(f"bad vector-table index {key} for degree {degree}")
            coeffs[key] = val
        return cls(k, degree, coeffs)

    # access ----------------------------------------------------------

    def get(self, idx: Sequence[int]) -> Expr:
        """Coefficient for an arbitrary index order (sign applied, repeats give 0)."""
        sign, key = canonical(idx)
        if sign == 0:
            return ZERO
        c = self.coeffs.get(key, ZERO)
        return c if sign == 1 else -c

    def coeff0(self, idx: Sequence[int]) -> Expr:
        return self.get((0,) + tuple(idx))

    def coeffB(self, idx: Sequence[int]) -> Expr:
        return self.get(tuple(idx))

    @property
    def is_zero_form(self) -> bool:
        return not self.coeffs

    def decomposition(self) -> "FormDecomposition":
        return FormDecomposition(self)

    # algebra ---------------------------------------------------------

    def _same(self, other: "Form") -> None:
        if (self.k, self.degree) != (other.k, other.degree):
            raise FormError(f"cannot combine forms of type {(self.k, self.degree)} and {(other.k, other.degree)}")

    def __add__(self, other: "Form") -> "Form":
        self._same(other)
        keys = sorted(set(self.coeffs) | set(other.coeffs))
        return Form(self.k, self.degree, {key: self.coeffs.get(key, ZERO) + other.coeffs.get(key, ZERO) for key in keys})

    def __neg__(self) -> "Form":
        return Form(self.k, self.degree, {key: -c for key, c in self.coeffs.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, f) -> "Form":
        f = _coerce(f)
        return Form(self.k, self.degree, {key: f * c for key, c in self.coeffs.items()})

    def map(self, fn: Callable[[Expr], Expr]) -> "Form":
        return Form(self.k, self.degree, {key: fn(c) for key, c in self.coeffs.items()})

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)


class FormDecomposition:
    """The e^0-part and the vector part of a form, read as operators.

    ``omega0(zeta0, sigmas)`` is the operator with one affine and K-1 vector
    slots (affine slot first); ``bold(sigmas)`` is the form on vector
    sections.  The affine slot accepts any affine section: its offset from
    e0 feeds the vector part.
    """

    def __init__(self, form: Form):
        self.form = form
        self.coeff0 = {key[1:]: c for key, c in form.coeffs.items() if key and key[0] == 0}
        self.coeffB = {key: c for key, c in form.coeffs.items() if not key or key[0] != 0}

    def omega0(self, zeta0: Section, vectors: Sequence[Section]) -> Expr:
        K = self.form.degree
        if K == 0:
            raise FormError("a 0-form has no e0-part operator")
        if not zeta0.is_affine or any(v.is_affine for v in vectors) or len(vectors) != K - 1:
            raise FormError("omega0 takes one affine and K-1 vector sections")
        rows = [v.comps for v in vectors]
        at_e0 = add_all(c * _minor(rows, key) for key, c in self.coeff0.items())
        offset = zeta0.vector_part()
        if all(c is ZERO for c in offset.comps):
            return at_e0
        return at_e0 + self.bold([offset] + list(vectors))

    def bold(self, vectors: Sequence[Section]) -> Expr:
        if len(vectors) != self.form.degree:
            raise FormError("arity mismatch")
        if any(v.is_affine for v in vectors):
            vectors = [v.vector_part() for v in vectors]
        rows = [v.comps for v in vectors]
        return add_all(c * _minor(rows, key) for key, c in self.coeffB.items())

    def omega_upper0(self, args: Sequence[Section], reference: Section) -> Expr:
        """The e^0-part evaluated on affine sections relative to ``reference``."""
        offs = [(a - reference) for a in args]
        terms = []
        for i in range(len(args)):
            rest = offs[:i] + offs[i + 1:]
            term = self.omega0(reference, rest)
            terms.append(term if i % 2 == 0 else -term)
        return add_all(terms)

    def reconstruct(self, args: Sequence[Section], reference: Section) -> Expr:
        """Value on affine sections from the two pieces and a reference section."""
        if self.form.degree == 0:
            return self.form.get(())
        offs = [(a - reference) for a in args]
        return self.omega_upper0(args, reference) + self.bold(offs)


def _minor(rows: Sequence[Sequence[Expr]], key: tuple) -> Expr:
    """det[rows[j][key[i]-1]] for fibre indices in key (1-based)."""
    m = len(key)
    if m == 0:
        return as_expr(1)
    return _det([[rows[j][key[i] - 1] for j in range(m)] for i in range(m)])


def _det(M: Sequence[Sequence[Expr]]) -> Expr:
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    terms = []
    for j in range(n):
        if M[0][j] is ZERO:
            continue
        sub = [row[:j] + row[j + 1:] for row in M[1:]]
        t = M[0][j] * _det(sub)
        terms.append(t if j % 2 == 0 else -t)
    return add_all(terms)


def _extended(s: Section) -> tuple:
    return (as_expr(s.weight),) + s.comps


def form_value(form: Form, args: Sequence[Section]) -> Expr:
    """Direct evaluation as a sum of coefficient-weighted minors."""
    if len(args) != form.degree:
        raise FormError(f"form of degree {form.degree} given {len(args)} arguments")
    if form.degree == 0:
        return form.get(())
    cols = [_extended(a) for a in args]
    K = form.degree
    terms = []
    for key, c in form.coeffs.items():
        M = [[cols[j][key[i]] for j in range(K)] for i in range(K)]
        terms.append(c * _det(M))
    return add_all(terms)


def eval_form(A: AffineAlgebroid | None, form: Form, args: Sequence[Section],
              reference: Section | None = None) -> Expr:
    """Value of ``form`` on a list of sections.

    Affine arguments go through the reference-section reconstruction (``e0``
    unless ``reference`` is given).  A vector argument ``sigma`` is moved to
    the front and replaced by the difference
    ``omega(zeta + sigma, ...) - omega(zeta, ...)`` with ``zeta = e0``.
    """
    args = list(args)
    if len(args) != form.degree:
        raise FormError(f"form of degree {form.degree} given {len(args)} arguments")
    if A is not None and any(a.k != A.k for a in args):
        raise FormError("section dimension does not match the algebroid")
    if form.degree == 0:
        return form.get(())
    if reference is None:
        reference = Section.e0(form.k)
    for p, a in enumerate(args):
        if not a.is_affine:
            rest = args[:p] + args[p + 1:]
            base = Section.e0(form.k)
            val = (eval_form(A, form, [base + a] + rest, reference)
                   - eval_form(A, form, [base] + rest, reference))
            return val if p % 2 == 0 else -val
    return form.decomposition().reconstruct(args, reference)


# ----------------------------------------------------------------- algebra


def wedge(a: Form, b: Form) -> Form:
    if a.k != b.k:
        raise FormError("forms over different fibre dimensions")
    deg = a.degree + b.degree
    out: dict = {}
    if deg > a.k + 1:
        return Form.zero(a.k, deg)
    for ka, ca in a.coeffs.items():
        for kb, cb in b.coeffs.items():
            sign, key = canonical(ka + kb)
            if sign == 0:
                continue
            out.setdefault(key, []).append(ca * cb if sign == 1 else -(ca * cb))
    return Form(a.k, deg, {key: add_all(v) for key, v in out.items()})


def contract(A: AffineAlgebroid | None, form: Form, s: Section) -> Form:
    """Interior product ``i_s form``: ``(i_s w)(a2, ...) = w(s, a2, ...)``."""
    if form.degree == 0:
        raise FormError("cannot contract a 0-form")
    if s.k != form.k:
        raise FormError("section dimension does not match the form")
    v = _extended(s)
    out: dict = {}
    for key, c in form.coeffs.items():
        for p, i in enumerate(key):
            if v[i] is ZERO:
                continue
            t = v[i] * c
            out.setdefault(key[:p] + key[p + 1:], []).append(t if p % 2 == 0 else -t)
    return Form(form.k, form.degree - 1, {key: add_all(v_) for key, v_ in out.items()})


def forms_residual(a: Form, b: Form, dom: SampleDomain) -> float:
    """Max |coefficient difference| over the samples (0 when identical)."""
    a._same(b)
    diffs = [c for c in (a - b).coeffs.values()]
    return max(dom.max_abs(diffs)) if diffs else 0.0


# ----------------------------------------------------------------- exterior derivative


def d_function(A: AffineAlgebroid, f) -> Form:
    f = _coerce(f)
    coeffs = {(0,): A.d_lam(f)}
    for a in range(A.k):
        coeffs[(a + 1,)] = A.d_rho(a, f)
    return Form(A.k, 1, coeffs)


def d_basis(A: AffineAlgebroid, a: int) -> Form:
    """d of the coframe element e^a (a = 0 for e^0, else 1-based)."""
    if a == 0:
        return Form.zero(A.k, 2)
    coeffs = {}
    for b in range(1, A.k + 1):
        coeffs[(0, b)] = -A.C0[a - 1][b - 1]
        for c in range(b + 1, A.k + 1):
            coeffs[(b, c)] = -A.C[a - 1][b - 1][c - 1]
    return Form(A.k, 2, coeffs)


def _d_monomial(A: AffineAlgebroid, key: tuple, cache: dict) -> Form:
    got = cache.get(key)
    if got is not None:
        return got
    if len(key) == 1:
        out = d_basis(A, key[0])
    else:
        head = Form.basis(A.k, key[:1])
        tail = Form.basis(A.k, key[1:])
        out = wedge(d_basis(A, key[0]), tail) - wedge(head, _d_monomial(A, key[1:], cache))
    cache[key] = out
    return out


def d_coord(A: AffineAlgebroid, form: Form) -> Form:
    """Exterior derivative from the coordinate rules and the graded Leibniz rule."""
    if form.k != A.k:
        raise FormError("form and algebroid have different fibre dimensions")
    deg = form.degree + 1
    if deg > A.k + 1:
        return Form.zero(A.k, deg)
    total = Form.zero(A.k, deg)
    cache: dict = {}
    for key, c in form.coeffs.items():
        piece = wedge(d_function(A, c), Form.basis(A.k, key))
        if key:
            piece = piece + _d_monomial(A, key, cache).scale(c)
        total = total + piece
    return total


# ----------------------------------------------------------------- definitional derivative


Evaluator = Union[Form, Callable[[Sequence[Section]], Expr]]


@dataclass(frozen=True)
class FormOperator:
    """A callable standing in for a form: ``fn(args) -> Expr`` of given degree."""

    degree: int
    fn: Callable = field(compare=False)

    def __call__(self, args: Sequence[Section]) -> Expr:
        return self.fn(list(args))


def _value(A: AffineAlgebroid, w, args: Sequence[Section]) -> Expr:
    if isinstance(w, Form):
        return eval_form(A, w, args)
    return w(args)


def _degree(w) -> int:
    return w.degree


def d_eval(A: AffineAlgebroid, w, args: Sequence[Section]) -> Expr:
    """Exterior derivative evaluated through its defining alternating sum.

    ``w`` is a Form or a FormOperator.  Vector arguments are handled by the
    difference rule ``dw(sigma, ...) = dw(e0 + sigma, ...) - dw(e0, ...)``.
    """
    args = list(args)
    K = _degree(w)
    if len(args) != K + 1:
        raise FormError(f"d of a degree-{K} form takes {K + 1} arguments, got {len(args)}")
    for p, a in enumerate(args):
        if not a.is_affine:
            rest = args[:p] + args[p + 1:]
            base = Section.e0(A.k)
            val = d_eval(A, w, [base + a] + rest) - d_eval(A, w, [base] + rest)
            return val if p % 2 == 0 else -val
    terms = []
    for i, z in enumerate(args):
        t = A.anchor(z)(_value(A, w, args[:i] + args[i + 1:]))
        terms.append(t if i % 2 == 0 else -t)
    for i, j in combinations(range(len(args)), 2):
        rest = [a for m, a in enumerate(args) if m not in (i, j)]
        t = _value(A, w, [A.bracket(args[i], args[j])] + rest)
        # (-1)^(i+j) with 1-based positions equals (-1)^(i+j) with 0-based ones
        terms.append(t if (i + j) % 2 == 0 else -t)
    return add_all(terms)


def d_operator(A: AffineAlgebroid, w) -> FormOperator:
    return FormOperator(_degree(w) + 1, lambda args: d_eval(A, w, args))


def d2_defect(A: AffineAlgebroid, form: Form, args: Sequence[Section]) -> tuple:
    """(lhs, rhs): d(d form) evaluated definitionally, and the sum of
    anchor-mismatch and Jacobi-defect terms it must equal for any bracket with
    the Leibniz property."""
    args = list(args)
    K = form.degree
    if len(args) != K + 2:
        raise FormError(f"d^2 of a degree-{K} form takes {K + 2} arguments, got {len(args)}")
    lhs = d_eval(A, d_operator(A, form), args)
    terms = []
    for i, j in combinations(range(len(args)), 2):
        rest = [a for m, a in enumerate(args) if m not in (i, j)]
        f = eval_form(A, form, rest)
        mismatch = A.anchor(A.bracket(args[i], args[j])) - A.anchor(args[i]).bracket(A.anchor(args[j]))
        t = mismatch(f)
        terms.append(t if (i + j) % 2 == 0 else -t)
    for i, j, l in combinations(range(len(args)), 3):
        zi, zj, zl = args[i], args[j], args[l]
        # cyclic sum of [[zi, zj], zl]; the nested order fixes the overall sign
        cyc = (A.bracket(A.bracket(zi, zj), zl) + A.bracket(A.bracket(zj, zl), zi)
               + A.bracket(A.bracket(zl, zi), zj))
        rest = [a for m, a in enumerate(args) if m not in (i, j, l)]
        t = eval_form(A, form, [cyc] + rest)
        # 1-based exponent i+j+l+3 has the opposite parity of the 0-based sum
        terms.append(-t if (i + j + l) % 2 == 0 else t)
    return lhs, add_all(terms)


# ----------------------------------------------------------------- Lie derivatives


def lie(A: AffineAlgebroid, s: Section, form: Form) -> Form:
    """``d_s = i_s d + d i_s`` for an affine or vector section ``s``."""
    out = contract(A, d_coord(A, form), s)
    if form.degree > 0:
        out = out + d_coord(A, contract(A, form, s))
    return out


def lie_section(A: AffineAlgebroid, s1: Section, s2: Section) -> Section:
    """Lie-type derivative of a section: the algebroid bracket."""
    return A.bracket(s1, s2)


def lie_pieces(A: AffineAlgebroid, z: Section, form: Form, vectors: Sequence[Section]) -> tuple:
    """The e^0-part at e0 and the vector part of ``d_z form``, computed
    directly from the pieces of ``form``.

    ``vectors`` holds K vector sections; the e^0-part uses the first K-1.
    Returns (omega0_value, bold_value).
    """
    K = form.degree
    dec = form.decomposition()
    e0 = Section.e0(A.k)
    lz = A.anchor(z)
    vs = list(vectors)
    if len(vs) != K:
        raise FormError("need K vector sections")
    part0 = None
    if K >= 1:
        head = vs[:K - 1]
        terms = [lz(dec.omega0(e0, head)), -dec.bold([A.bracket(z, e0)] + head)]
        for j in range(K - 1):
            t = dec.omega0(e0, [A.bracket(z, head[j])] + head[:j] + head[j + 1:])
            terms.append(t if j % 2 == 1 else -t)
        part0 = add_all(terms)
    terms = [lz(dec.bold(vs)) if K else lz(form.get(()))]
    for j in range(K):
        t = dec.bold([A.bracket(z, vs[j])] + vs[:j] + vs[j + 1:])
        terms.append(t if j % 2 == 1 else -t)
    return part0, add_all(terms)
