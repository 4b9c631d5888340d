"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class HadamardFDEError(Exception):
    """Base class for every error raised by :mod:`hadamard_fde`."""


class DomainError(HadamardFDEError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ShapeError(HadamardFDEError, ValueError):
    """Array sizes or grids do not match, or a grid is too coarse."""


class ConvergenceError(HadamardFDEError, RuntimeError):
    """An iterative procedure stopped before meeting its tolerance.

    ``last_update`` is the size of the last correction (series term magnitude,
    Picard update, ...) and ``context`` carries whatever else the raising site
    knows (interval index, contraction factor).
    """

    def __init__(self, message: str, *, last_update: float, context: dict | None = None):
        super().__init__(message)
        self.last_update = last_update
        self.context = dict(context or {})


class PlanningError(HadamardFDEError, ValueError):
    """A contraction-mapping subdivision cannot be built."""

    def __init__(self, message: str, *, required_steps: float):
        super().__init__(message)
        self.required_steps = required_steps


class ValidationError(HadamardFDEError, ValueError):
    """A problem specification failed validation; ``field`` is its JSON path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class SpecParseError(HadamardFDEError, ValueError):
    """Malformed JSON; ``offset`` is the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ExpressionSyntaxError(HadamardFDEError, ValueError):
    """Lexical or syntax error in a right-hand-side expression (1-based column)."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} at column {column}")
        self.column = column


class UnknownIdentifierError(ExpressionSyntaxError):
    def __init__(self, name: str, column: int):
        super().__init__(f"unknown identifier {name!r}", column)
        self.name = name


class EvaluationError(HadamardFDEError, ArithmeticError):
    """Evaluating an expression hit a point outside its domain.

    ``index`` is the flat position in the evaluated arrays (``None`` for
    scalars); ``column`` points at the offending sub-expression.
    """

    def __init__(self, message: str, *, index: int | None = None, column: int | None = None,
                 location: str | None = None):
        self.reason = message
        self.index = index
        self.column = column
        self.location = location
        super().__init__(self._render())

    def _render(self) -> str:
        parts = [self.reason]
        if self.column is not None:
            parts.append(f"(expression column {self.column})")
        if self.location is not None:
            parts.append(f"at {self.location}")
        elif self.index is not None:
            parts.append(f"at element {self.index}")
        return " ".join(parts)

    def at(self, location: str) -> "EvaluationError":
        """Return a copy annotated with a grid location."""
        return EvaluationError(self.reason, index=self.index, column=self.column, location=location)
