# utils/errors.py
"""
Exception hierarchy shared by every toolkit module.

Each class also derives from the built-in exception a caller would
naturally catch, so ``except ValueError`` keeps working.
"""

from typing import Optional


class CrossImpactError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(CrossImpactError, ValueError):
    """Array shapes disagree with the model dimensions."""


class InvalidModelError(CrossImpactError, ValueError):
    """Model primitives violate their invariants (signs, rank, sums)."""


class IllConditionedError(CrossImpactError, ArithmeticError):
    """A matrix that must be inverted is numerically singular."""

    def __init__(self, message: str, condition_number: Optional[float] = None):
        super().__init__(message)
        self.condition_number = condition_number


class InfeasibleScheduleError(CrossImpactError, ValueError):
    """A schedule violates its inventory or sign constraints."""


class ConvergenceError(CrossImpactError, RuntimeError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class CalibrationError(CrossImpactError, ValueError):
    """Observed profiles cannot be inverted into a mixture profile."""


class FormatError(CrossImpactError, ValueError):
    """A data file does not match its documented format."""

    def __init__(self, path: str, message: str, row: Optional[int] = None, column: Optional[str] = None):
        location = str(path)
        if row is not None:
            location += f", row {row}"
        if column is not None:
            location += f", column '{column}'"
        super().__init__(f"{location}: {message}")
        self.path = str(path)
        self.row = row
        self.column = column
