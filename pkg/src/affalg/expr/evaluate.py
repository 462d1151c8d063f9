"""Numeric evaluation by generating straight-line Python code.

Each distinct node becomes one assignment, so shared subexpressions are
computed once.  Summation order follows the canonical term order, which
makes results reproducible bit for bit.  Two flavours are generated: a
scalar one on ``math`` for integrators, and one vectorised over numpy
arrays for sampling, where domain violations are recorded per sample
instead of raised.
"""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, UnboundVariable
from .nodes import Add, Const, Expr, Func, Mul, Var


def _topo(roots: Sequence[Expr]) -> list:
    order: list = []
    index: dict = {}
    for root in roots:
        if root in index:
            continue
        stack = [(root, False)]
        while stack:
            node, done = stack.pop()
            if node in index:
                continue
            if done:
                index[node] = len(order)
                order.append(node)
                continue
            stack.append((node, True))
            for child in node.children():
                if child not in index:
                    stack.append((child, False))
    return order


def _lit(c) -> str:
    return repr(float(c))


def _scaled(coeff, body: str) -> str:
    if coeff == 1:
        return body
    if coeff == -1:
        return f"-{body}"
    return f"{_lit(coeff)}*{body}"


def _codegen(roots: Sequence[Expr], vectorized: bool) -> tuple[str, list]:
    order = _topo(roots)
    index = {node: i for i, node in enumerate(order)}
    lib = "np" if vectorized else "math"
    lines = ["def _f(env, ctx):"]
    for i, node in enumerate(order):
        if isinstance(node, Const):
            rhs = _lit(node.value)
        elif isinstance(node, Var):
            rhs = f"env[{node.name!r}]"
        elif isinstance(node, Func):
            a = f"v{index[node.arg]}"
            if node.name == "ln":
                rhs = f"_ln({a}, {i}, ctx)"
            elif node.name == "exp":
                rhs = f"_exp({a})"
            else:
                rhs = f"{lib}.{node.name}({a})"
        elif isinstance(node, Mul):
            num = [f"v{index[b]}" + (f"**{k}" if k != 1 else "") for b, k in node.factors if k > 0]
            den = [f"v{index[b]}" + (f"**{-k}" if k != -1 else "") for b, k in node.factors if k < 0]
            if den:
                top = _lit(node.coeff) if not num else _scaled(node.coeff, "*".join(num))
                rhs = f"_div({top}, {'*'.join(den)}, {i}, ctx)"
            else:
                rhs = _scaled(node.coeff, "*".join(num))
        elif isinstance(node, Add):
            parts = [_lit(node.const)] if node.const != 0 else []
            for m, c in node.terms:
                parts.append(f"({_scaled(c, f'v{index[m]}')})")
            rhs = " + ".join(parts)
        else:
            raise TypeError(type(node).__name__)
        lines.append(f"    v{i} = {rhs}")
    lines.append("    return (" + "".join(f"v{index[r]}, " for r in roots) + ")")
    return "\n".join(lines), order


class _ScalarCtx:
    def __init__(self, nodes):
        self.nodes = nodes

    def fail(self, i, what):
        raise DomainError(what, self.nodes[i])


class _VectorCtx:
    def __init__(self, nodes):
        self.nodes = nodes
        self.bad = None
        self.first = None

    def flag(self, mask, i):
        mask = np.broadcast_to(mask, np.shape(mask))
        self.bad = mask.copy() if self.bad is None else (self.bad | mask)
        if self.first is None:
            self.first = self.nodes[i]


def _div_scalar(a, b, i, ctx):
    if b == 0:
        ctx.fail(i, "division by zero")
    return a / b


def _ln_scalar(a, i, ctx):
    if not a > 0:
        ctx.fail(i, "logarithm of a nonpositive number")
    return math.log(a)


def _exp_scalar(a):
    try:
        return math.exp(a)
    except OverflowError:
        return math.inf


def _div_vector(a, b, i, ctx):
    bad = b == 0
    if np.any(bad):
        ctx.flag(bad, i)
        b = np.where(bad, 1.0, b)
    return a / b


def _ln_vector(a, i, ctx):
    bad = ~(a > 0)
    if np.any(bad):
        ctx.flag(bad, i)
        a = np.where(bad, 1.0, a)
    return np.log(a)


def _exp_vector(a):
    with np.errstate(over="ignore"):
        return np.exp(a)


class Compiled:
    """A batch of expressions compiled into one Python function."""

    def __init__(self, exprs: Sequence[Expr], vectorized: bool = True):
        self.exprs = tuple(exprs)
        self.vectorized = vectorized
        self.free = frozenset().union(*(e.free_vars for e in self.exprs)) if self.exprs else frozenset()
        src, self._nodes = _codegen(self.exprs, vectorized)
        ns = {
            "np": np,
            "math": math,
            "_div": _div_vector if vectorized else _div_scalar,
            "_ln": _ln_vector if vectorized else _ln_scalar,
            "_exp": _exp_vector if vectorized else _exp_scalar,
        }
        exec(compile(src, "<affalg-expr>", "exec"), ns)
        self._fn = ns["_f"]

    def _check(self, env: Mapping) -> None:
        for name in self.free:
            if name not in env:
                raise UnboundVariable(name)

    def scalar(self, env: Mapping) -> tuple:
        self._check(env)
        return self._fn(env, _ScalarCtx(self._nodes))

    def vector(self, env: Mapping) -> tuple:
        """Returns (values, bad_mask or None, first offending subtree or None)."""
        self._check(env)
        ctx = _VectorCtx(self._nodes)
        with np.errstate(invalid="ignore", over="ignore"):
            values = self._fn(env, ctx)
        return values, ctx.bad, ctx.first


def _cached(e: Expr, vectorized: bool) -> Compiled:
    if e._fn is None:
        e._fn = {}
    c = e._fn.get(vectorized)
    if c is None:
        c = e._fn[vectorized] = Compiled((e,), vectorized)
    return c


def evaluate(e: Expr, env: Mapping[str, float]) -> float:
    """Evaluate ``e`` at one point; raises DomainError or UnboundVariable."""
    env = {k: float(v) for k, v in env.items()}
    return float(_cached(e, False).scalar(env)[0])


def evaluate_many(exprs: Sequence[Expr], env: Mapping[str, float]) -> list:
    env = {k: float(v) for k, v in env.items()}
    return [float(v) for v in Compiled(exprs, False).scalar(env)]


def evaluate_vector(e: Expr, env: Mapping[str, np.ndarray]):
    return _cached(e, True).vector(env)


def lambdify(exprs: Sequence[Expr], names: Sequence[str]):
    """Fast scalar callable f(*values) -> tuple of floats, positional in ``names``."""
    comp = Compiled(exprs, False)
    missing = comp.free - set(names)
    if missing:
        raise UnboundVariable(sorted(missing)[0])
    fn = comp._fn
    ctx = _ScalarCtx(comp._nodes)
    names = tuple(names)

    def call(*values):
        return fn(dict(zip(names, values)), ctx)

    return call


def evaluate_arrays(exprs: Sequence[Expr], env: Mapping[str, np.ndarray], size: int) -> list:
    """Evaluate several expressions on aligned sample arrays of length ``size``.

    Raises DomainError (with the offending subtree) if any entry is singular.
    """
    if not exprs:
        return []
    comp = Compiled(exprs, True)
    values, bad, first = comp.vector(env)
    if bad is not None and bad.any():
        raise DomainError(f"singular at {int(bad.sum())} of {size} points", first)
    return [np.broadcast_to(np.asarray(v, dtype=float), (size,)) for v in values]
