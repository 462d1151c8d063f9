"""Expression nodes.

Nodes are immutable and interned: structurally equal expressions are the
same Python object, so ``==`` is identity and hashing is O(1).  Sums and
products are kept in a flat canonical form (like terms collected, integer
exponents merged, products of sums distributed while small), which keeps
the expressions produced by the geometry code compact.  Nothing downstream
relies on this for correctness; identities are always decided numerically.
"""
from __future__ import annotations

import math
import re
import weakref
import zlib
from fractions import Fraction
from typing import Iterable, Union

from .errors import DomainError

# Exact numbers are int when integral, Fraction otherwise; int arithmetic is
# far cheaper than Fraction and dominates the cost of large expansions.
Number = Union[int, Fraction, float]

FUNCTIONS = ("sin", "cos", "exp", "ln")
_FUNC_ID = {name: i for i, name in enumerate(FUNCTIONS)}

# Largest number of terms a product of sums may expand into.
EXPAND_LIMIT = 400

_VAR_RE = re.compile(r"^(?:t|x[1-9]\d*|y[1-9]\d*|p\d+)$")

_interned: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()


def is_variable_name(name: str) -> bool:
    return bool(_VAR_RE.match(name)) and not (name.startswith("p") and len(name) > 2 and name[1] == "0")


def var_rank(name: str) -> tuple:
    """Canonical ordering of variables: t, x1.., y1.., p0, p1.."""
    if name == "t":
        return (0, 0)
    head, tail = name[0], name[1:]
    order = {"x": 1, "y": 2, "p": 3}
    if head in order and tail.isdigit():
        return (order[head], int(tail))
    return (4, zlib.crc32(name.encode()))


def _num(value) -> Number:
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, float):
        if value.is_integer() and abs(value) < 2.0**63:
            return int(value)
        return value
    raise TypeError(f"cannot use {type(value).__name__} as a number")


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ("_digest", "_free", "_diff", "_fn", "__weakref__")
    _rank = 99

    def _init(self, digest: int, free: frozenset) -> None:
        self._digest = digest
        self._free = free
        self._diff = None
        self._fn = None

    def __hash__(self) -> int:
        return self._digest

    # Interned: identity is structural equality.
    def __eq__(self, other) -> bool:
        return self is other

    def __ne__(self, other) -> bool:
        return self is not other

    @property
    def free_vars(self) -> frozenset:
        return self._free

    def sort_key(self) -> tuple:
        return (self._rank, 0, self._digest)

    def children(self) -> tuple:
        return ()

    # arithmetic sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, mul(-1, other))

    def __rsub__(self, other):
        return add(other, mul(-1, self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return mul(self, power(other, -1))

    def __rtruediv__(self, other):
        return mul(other, power(self, -1))

    def __neg__(self):
        return mul(-1, self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        return power(self, n)

    def __str__(self) -> str:
        from .printer import to_text
        return to_text(self)

    def __repr__(self) -> str:
        return f"Expr({str(self)!r})"

    def diff(self, v: str) -> "Expr":
        return diff(self, v)

    def eval(self, env):
        from .evaluate import evaluate
        return evaluate(self, env)

    @property
    def is_zero_literal(self) -> bool:
        return self is ZERO


class Const(Expr):
    __slots__ = ("value",)
    _rank = 0

    def __new__(cls, value):
        value = _num(value)
        isf = isinstance(value, float)
        key = ("c", value, isf)
        node = _interned.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        node.value = value
        node._init(hash((0, value, isf)), frozenset())
        _interned[key] = node
        return node

    def __reduce__(self):
        return (Const, (self.value,))


class Var(Expr):
    __slots__ = ("name",)
    _rank = 1

    def __new__(cls, name: str):
        key = ("v", name)
        node = _interned.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        node.name = name
        node._init(hash((1, zlib.crc32(name.encode()))), frozenset((name,)))
        _interned[key] = node
        return node

    def sort_key(self) -> tuple:
        return (self._rank, var_rank(self.name), self._digest)

    def __reduce__(self):
        return (Var, (self.name,))


class Func(Expr):
    __slots__ = ("name", "arg")
    _rank = 2

    def __new__(cls, name: str, arg: Expr):
        key = ("f", name, arg)
        node = _interned.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        node.name = name
        node.arg = arg
        node._init(hash((2, _FUNC_ID[name], arg._digest)), arg._free)
        _interned[key] = node
        return node

    def sort_key(self) -> tuple:
        return (self._rank, _FUNC_ID[self.name], self._digest)

    def children(self) -> tuple:
        return (self.arg,)

    def __reduce__(self):
        return (func, (self.name, self.arg))


class Mul(Expr):
    """coeff * prod(base**exp); bases are never constants or products."""

    __slots__ = ("coeff", "factors")
    _rank = 3

    def __new__(cls, coeff: Number, factors: tuple):
        key = ("m", coeff, factors)
        node = _interned.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        node.coeff = coeff
        node.factors = factors
        free = frozenset().union(*(b._free for b, _ in factors))
        node._init(hash((3, coeff, tuple((b._digest, e) for b, e in factors))), free)
        _interned[key] = node
        return node

    def children(self) -> tuple:
        return tuple(b for b, _ in self.factors)

    def __reduce__(self):
        return (_rebuild_mul, (self.coeff, self.factors))


class Add(Expr):
    """const + sum(coeff * monomial); monomials are never constants or sums."""

    __slots__ = ("const", "terms")
    _rank = 4

    def __new__(cls, const: Number, terms: tuple):
        key = ("a", const, terms)
        node = _interned.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        node.const = const
        node.terms = terms
        free = frozenset().union(*(m._free for m, _ in terms))
        node._init(hash((4, const, tuple((m._digest, c) for m, c in terms))), free)
        _interned[key] = node
        return node

    def children(self) -> tuple:
        return tuple(m for m, _ in self.terms)

    def __reduce__(self):
        return (_rebuild_add, (self.const, self.terms))


def _rebuild_mul(coeff, factors):
    return mul(coeff, *(power(b, e) for b, e in factors))


def _rebuild_add(const, terms):
    return add(const, *(mul(c, m) for m, c in terms))


ZERO = Const(0)
ONE = Const(1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        from .parser import parse
        return parse(value)
    return Const(value)


def const(value) -> Expr:
    return Const(value)


def var(name: str) -> Expr:
    if not is_variable_name(name):
        raise ValueError(f"not a variable name: {name!r}")
    return Var(name)


# ---------------------------------------------------------------- sums

def _split_coeff(e: Expr) -> tuple:
    """Return (coeff, monomial) with e == coeff * monomial."""
    if isinstance(e, Mul) and e.coeff != 1:
        return e.coeff, _build_mul(1, dict(e.factors))
    return 1, e


def _add_into(e: Expr, c: Number, acc: dict, box: list) -> None:
    if isinstance(e, Const):
        box[0] += c * e.value
    elif isinstance(e, Add):
        box[0] += c * e.const
        for m, cm in e.terms:
            acc[m] = acc.get(m, 0) + c * cm
    else:
        cm, m = _split_coeff(e)
        if isinstance(m, Add):
            _add_into(m, c * cm, acc, box)
        else:
            acc[m] = acc.get(m, 0) + c * cm


def add(*items) -> Expr:
    acc: dict = {}
    box = [0]
    for item in items:
        _add_into(as_expr(item), 1, acc, box)
    return _build_add(box[0], acc)


def add_all(items: Iterable) -> Expr:
    return add(*items)


def _build_add(const_part: Number, acc: dict) -> Expr:
    terms = [(m, c) for m, c in acc.items() if c != 0]
    const_part = _num(const_part)
    if not terms:
        return Const(const_part)
    if const_part == 0 and len(terms) == 1:
        m, c = terms[0]
        return _scale(m, _num(c))
    terms.sort(key=lambda mc: mc[0].sort_key())
    return Add(const_part, tuple((m, _num(c)) for m, c in terms))


def _scale(m: Expr, c: Number) -> Expr:
    if c == 1:
        return m
    if isinstance(m, Mul):
        return Mul(c, m.factors)
    return Mul(c, ((m, 1),))


# ------------------------------------------------------------ products

def _mul_into(e: Expr, n: int, facs: dict, box: list) -> None:
    if isinstance(e, Const):
        v = e.value
        if v == 0 and n < 0:
            raise DomainError("division by zero", e)
        box[0] *= _ipow(v, n)
    elif isinstance(e, Mul):
        box[0] *= _ipow(e.coeff, n)
        for b, k in e.factors:
            facs[b] = facs.get(b, 0) + k * n
    else:
        facs[e] = facs.get(e, 0) + n


def _ipow(v: Number, n: int) -> Number:
    if n < 0 and not isinstance(v, float):
        return Fraction(v) ** n
    return v**n


def mul(*items) -> Expr:
    facs: dict = {}
    box = [1]
    for item in items:
        _mul_into(as_expr(item), 1, facs, box)
    return _finish_mul(box[0], facs)


def power(base, n: int) -> Expr:
    if not isinstance(n, int):
        raise TypeError("only integer powers are supported")
    facs: dict = {}
    box = [1]
    _mul_into(as_expr(base), n, facs, box)
    return _finish_mul(box[0], facs)


def _finish_mul(coeff: Number, facs: dict) -> Expr:
    coeff = _num(coeff)
    if coeff == 0:
        return ZERO
    facs = {b: k for b, k in facs.items() if k != 0}
    sums = [(b, k) for b, k in facs.items() if isinstance(b, Add) and k > 0]
    if sums:
        if len(sums) == 1 and sums[0][1] == 1:
            expand = True
        else:
            size = 1
            for b, k in sums:
                size *= len(b.terms) ** k
            expand = size <= EXPAND_LIMIT
        if expand:
            for b, _ in sums:
                del facs[b]
            rest = _build_mul(coeff, facs)
            parts = [rest]
            for b, k in sums:
                pieces = [c * m for m, c in b.terms]
                if b.const != 0:
                    pieces.append(Const(b.const))
                for _ in range(k):
                    parts = [mul(p, q) for p in parts for q in pieces]
            return add(*parts)
    return _build_mul(coeff, facs)


def _build_mul(coeff: Number, facs: dict) -> Expr:
    items = [(b, k) for b, k in facs.items() if k != 0]
    if not items:
        return Const(coeff)
    if coeff == 1 and len(items) == 1 and items[0][1] == 1:
        return items[0][0]
    items.sort(key=lambda bk: bk[0].sort_key())
    return Mul(coeff, tuple(items))


# ----------------------------------------------------------- functions

_EXACT = {
    ("sin", 0): 0,
    ("cos", 0): 1,
    ("exp", 0): 1,
    ("ln", 1): 0,
}


def func(name: str, arg) -> Expr:
    if name not in _FUNC_ID:
        raise ValueError(f"unknown function {name!r}")
    arg = as_expr(arg)
    if isinstance(arg, Const):
        v = arg.value
        exact = _EXACT.get((name, v))
        if exact is not None:
            return Const(exact)
        if name == "ln" and v <= 0:
            raise DomainError("logarithm of a nonpositive number", Func(name, arg))
        return Const(float(getattr(math, "log" if name == "ln" else name)(float(v))))
    return Func(name, arg)


def sin(a) -> Expr:
    return func("sin", a)


def cos(a) -> Expr:
    return func("cos", a)


def exp(a) -> Expr:
    return func("exp", a)


def ln(a) -> Expr:
    return func("ln", a)


# ------------------------------------------------------ differentiation

def diff(e: Expr, v: str) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to variable ``v``."""
    if v not in e._free:
        return ZERO
    cache = e._diff
    if cache is None:
        cache = e._diff = {}
    out = cache.get(v)
    if out is None:
        out = cache[v] = _diff(e, v)
    return out


def _diff(e: Expr, v: str) -> Expr:
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Add):
        return add(*(mul(c, diff(m, v)) for m, c in e.terms))
    if isinstance(e, Mul):
        parts = []
        for j, (b, k) in enumerate(e.factors):
            db = diff(b, v)
            if db is ZERO:
                continue
            facs = dict(e.factors)
            facs[b] = k - 1
            parts.append(mul(_finish_mul(e.coeff * k, facs), db))
        return add(*parts)
    if isinstance(e, Func):
        a = e.arg
        da = diff(a, v)
        if e.name == "sin":
            return mul(Func("cos", a), da)
        if e.name == "cos":
            return mul(-1, Func("sin", a), da)
        if e.name == "exp":
            return mul(e, da)
        return mul(da, power(a, -1))
    raise TypeError(f"cannot differentiate {type(e).__name__}")


# ---------------------------------------------------------- substitution

def subs(e: Expr, mapping: dict) -> Expr:
    """Replace variables by expressions, simultaneously."""
    mapping = {k: as_expr(v) for k, v in mapping.items() if k in e._free}
    if not mapping:
        return e
    memo: dict = {}

    def go(node: Expr) -> Expr:
        if not (node._free & mapping.keys()):
            return node
        got = memo.get(node)
        if got is not None:
            return got
        if isinstance(node, Var):
            out = mapping[node.name]
        elif isinstance(node, Add):
            out = add(node.const, *(mul(c, go(m)) for m, c in node.terms))
        elif isinstance(node, Mul):
            out = mul(node.coeff, *(power(go(b), k) for b, k in node.factors))
        elif isinstance(node, Func):
            out = func(node.name, go(node.arg))
        else:
            out = node
        memo[node] = out
        return out

    return go(e)


def rename(e: Expr, names: dict) -> Expr:
    return subs(e, {old: Var(new) for old, new in names.items()})


def count_nodes(e: Expr) -> int:
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        stack.extend(node.children())
    return len(seen)
