"""Minimal symbolic expressions over t, x_i, y_a, p_0, p_a."""
from .errors import DomainError, ExprError, ParseError, UnboundVariable, UnknownIdentifier
from .evaluate import Compiled, evaluate, evaluate_arrays, evaluate_many, lambdify
from .nodes import (
    FUNCTIONS,
    ONE,
    ZERO,
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Var,
    add,
    add_all,
    as_expr,
    cos,
    count_nodes,
    diff,
    exp,
    func,
    is_variable_name,
    ln,
    mul,
    power,
    rename,
    sin,
    subs,
    var,
)
from .parser import parse
from .printer import to_text
from .sampling import SampleDomain, is_zero, residual

eval = evaluate  # noqa: A001  (operation name used throughout the docs)

__all__ = [
    "Add", "Compiled", "Const", "DomainError", "Expr", "ExprError", "FUNCTIONS", "Func", "Mul",
    "ONE", "ParseError", "SampleDomain", "UnboundVariable", "UnknownIdentifier", "Var", "ZERO",
    "add", "add_all", "as_expr", "cos", "count_nodes", "diff", "evaluate", "evaluate_arrays", "evaluate_many", "exp", "func",
    "is_variable_name", "is_zero", "lambdify", "ln", "mul", "parse", "power", "rename",
    "residual", "sin", "subs", "to_text", "var",
]
