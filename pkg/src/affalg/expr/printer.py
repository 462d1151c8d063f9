"""Render expressions in the input grammar, so that parse(to_text(e)) == e."""
from __future__ import annotations

from fractions import Fraction

from .nodes import Add, Const, Expr, Func, Mul, Var

_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def _number(v) -> tuple[str, int]:
    if isinstance(v, int):
        text, prec = str(v), _ATOM
    elif isinstance(v, Fraction):
        if v.denominator == 1:
            text, prec = str(v.numerator), _ATOM
        else:
            text, prec = f"{abs(v.numerator)}/{v.denominator}", _MUL
            if v < 0:
                text = "-" + text
    else:
        text, prec = repr(float(v)), _ATOM
    if text.startswith("-"):
        prec = _NEG
    return text, prec


def _wrap(text: str, prec: int, ctx: int) -> str:
    return f"({text})" if prec < ctx else text


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, Const):
        return _number(e.value)
    if isinstance(e, Var):
        return e.name, _ATOM
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})", _ATOM
    if isinstance(e, Mul):
        return _render_mul(e.coeff, e.factors)
    if isinstance(e, Add):
        return _render_add(e)
    raise TypeError(type(e).__name__)


def _factor(b: Expr, k: int) -> str:
    text, prec = _render(b)
    text = _wrap(text, prec, _ATOM)
    return text if k == 1 else f"{text}^{k}"


def _render_mul(coeff, factors) -> tuple[str, int]:
    negative = coeff < 0
    mag = -coeff if negative else coeff
    num = [_factor(b, k) for b, k in factors if k > 0]
    den = [_factor(b, -k) for b, k in factors if k < 0]
    head = []
    if mag != 1 or not num:
        head.append(_number(mag)[0])
    text = "*".join(head + num)
    if den:
        text += "".join("/" + d for d in den)
    pieces = len(head) + len(num) + len(den)
    prec = _MUL if pieces > 1 or "/" in text else _POW
    if negative:
        # -a*b reads as (-a)*b, which has the same value bit for bit
        return "-" + text, _NEG if prec == _POW else _MUL
    return text, prec


def _render_add(e: Add) -> tuple[str, int]:
    out = []
    items = [(m, c) for m, c in e.terms]
    for idx, (m, c) in enumerate(items):
        neg = c < 0
        body = _render_mul(-c if neg else c, m.factors if isinstance(m, Mul) else ((m, 1),))[0]
        if idx == 0:
            out.append("-" + body if neg else body)
        else:
            out.append((" - " if neg else " + ") + body)
    if e.const != 0:
        text = _number(abs(e.const))[0]
        out.append((" - " if e.const < 0 else " + ") + text)
    return "".join(out), _ADD


def to_text(e: Expr) -> str:
    return _render(e)[0]
