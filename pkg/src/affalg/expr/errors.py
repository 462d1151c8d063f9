"""Exceptions raised by the expression engine."""


class ExprError(Exception):
    pass


class ParseError(ExprError, ValueError):
    """Malformed expression text; ``offset`` is a byte offset into the input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(ParseError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class UnboundVariable(ExprError, KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unbound variable {self.name!r}"


class DomainError(ExprError, ArithmeticError):
    """Evaluation left the domain of an operation (division by zero, ln of x <= 0)."""

    def __init__(self, message: str, subtree=None):
        detail = f"{message} in {subtree}" if subtree is not None else message
        super().__init__(detail)
        self.subtree = subtree
