"""Exception hierarchy shared by the algebra, parser and CLI."""
from __future__ import annotations


class SLHError(Exception):
    """Base class for every error raised by :mod:`slhnet`.

    ``location`` is filled in by the netlist evaluator so that errors raised
    deep inside the algebra can be traced back to the statement that caused
    them.
    """

    location: str | None = None

    def at(self, location: str) -> "SLHError":
        self.location = location
        return self

    def __str__(self) -> str:
        msg = super().__str__()
        if self.location:
            return f"{self.location}: {msg}"
        return msg


class UnknownLabel(SLHError, KeyError):
    pass


class DimensionMismatch(SLHError, ValueError):
    pass


class SingularMatrix(SLHError, ArithmeticError):
    """A matrix that had to be inverted is singular to working precision."""

    def __init__(self, context: str, rcond: float = 0.0):
        self.context = context
        self.rcond = rcond
        super().__init__(f"{context} is singular (rcond={rcond:.3g})")


class IllPosedNetwork(SingularMatrix):
    """The feedback loop is not well-posed (I - S_ii or E_ii not invertible)."""


class NoStratonovichForm(SingularMatrix):
    """I + S is singular, so the model has no Stratonovich E-matrix."""


class SingularAtPoint(SingularMatrix):
    """The delayed loop resolvent is singular at the requested Laplace point."""


class NumericalError(SLHError, ArithmeticError):
    """An inverse passed the conditioning test but failed its residual check."""


class PortCountMismatch(SLHError, ValueError):
    pass


class DuplicatePortLabel(SLHError, ValueError):
    pass


class BadParam(SLHError, ValueError):
    pass


class InvalidModel(SLHError, ValueError):
    """Model data violates a structural invariant (shape, unitarity, ...)."""


class NetspecError(SLHError):
    """Base for netlist errors; carries a 1-based line and column."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(message)
        if line is not None:
            self.location = f"line {line}" + (f", column {column}" if column is not None else "")


class NetspecSyntaxError(NetspecError):
    pass


class UndefinedName(NetspecError):
    pass


class DuplicateName(NetspecError):
    pass
