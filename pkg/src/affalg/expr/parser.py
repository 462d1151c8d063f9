"""Recursive-descent parser for coordinate expressions.

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' exponent)?
    exponent := '-'? INTEGER ('^' exponent)?
    atom     := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'

Unary minus binds looser than '^' (so -x1^2 is -(x1^2)) and exponent
towers associate to the right.  Integer literals become exact rationals,
literals with a decimal point or exponent become floats.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Optional

from .errors import ParseError, UnknownIdentifier
from .nodes import FUNCTIONS, Const, Expr, Var, add, func, is_variable_name, mul, power

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


class _Tok:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind, self.text, self.pos = kind, text, pos


def _tokenize(text: str) -> list:
    out = []
    i = 0
    n = len(text)
    while True:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            out.append(_Tok("end", "", i))
            return out
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            raise ParseError(f"unexpected character {text[i]!r}", _byte_offset(text, i))
        kind = m.lastgroup
        start = m.start(kind)
        out.append(_Tok(kind, m.group(kind), start))
        i = m.end()


def _byte_offset(text: str, i: int) -> int:
    return len(text[:i].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, allowed: Optional[frozenset]):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.allowed = allowed

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok = None):
        tok = tok or self.tok
        if tok.kind == "end":
            message = "unexpected end of input" if message is None else message
        return ParseError(message, _byte_offset(self.text, tok.pos))

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str) -> None:
        if not self.accept(op):
            what = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise self.error(f"expected {op!r}, found {what}")

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while True:
            if self.accept("+"):
                terms.append(self.term())
            elif self.accept("-"):
                terms.append(mul(-1, self.term()))
            else:
                return add(*terms) if len(terms) > 1 else terms[0]

    def term(self) -> Expr:
        e = self.unary()
        while True:
            if self.accept("*"):
                e = mul(e, self.unary())
            elif self.tok.kind == "op" and self.tok.text == "/":
                tok = self.tok
                self.i += 1
                den = self.unary()
                try:
                    e = mul(e, power(den, -1))
                except ArithmeticError as exc:
                    raise ParseError(f"division by zero ({exc})", _byte_offset(self.text, tok.pos)) from None
            else:
                return e

    def unary(self) -> Expr:
        if self.accept("-"):
            return mul(-1, self.unary())
        return self.pow()

    def pow(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            tok = self.tok
            n = self.exponent()
            try:
                return power(base, n)
            except ArithmeticError as exc:
                raise ParseError(f"invalid power ({exc})", _byte_offset(self.text, tok.pos)) from None
        return base

    def exponent(self) -> int:
        sign = -1 if self.accept("-") else 1
        tok = self.tok
        if tok.kind != "num" or not tok.text.isdigit():
            raise self.error("expected an integer exponent")
        self.i += 1
        n = int(tok.text)
        if self.accept("^"):
            m = self.exponent()
            if m < 0:
                raise self.error("exponent tower must stay integral", tok)
            n = n**m
        return sign * n

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            if re.fullmatch(r"\d+", tok.text):
                return Const(Fraction(int(tok.text)))
            return Const(float(tok.text))
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name in FUNCTIONS:
                if not self.accept("("):
                    raise self.error(f"expected '(' after {name}")
                arg = self.expr()
                self.expect(")")
                try:
                    return func(name, arg)
                except ArithmeticError as exc:
                    raise ParseError(str(exc), _byte_offset(self.text, tok.pos)) from None
            if not is_variable_name(name) or (self.allowed is not None and name not in self.allowed):
                raise UnknownIdentifier(name, _byte_offset(self.text, tok.pos))
            return Var(name)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {tok.text!r}")


def parse(text: str, variables: Optional[Iterable[str]] = None) -> Expr:
    """Parse ``text``; if ``variables`` is given, only those names are accepted."""
    allowed = frozenset(variables) if variables is not None else None
    return _Parser(text, allowed).parse()
