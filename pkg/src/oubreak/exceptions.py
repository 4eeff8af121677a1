"""Exception hierarchy.

Validation problems (bad input, bad configuration) and numerical failures
(singular or ill-conditioned systems) are kept apart so the CLI can map
them to distinct exit codes.
"""

from __future__ import annotations


class OUBreakError(Exception):
    """Base class for all package errors."""


class ValidationError(OUBreakError, ValueError):
    """Input data or parameters violate a precondition."""


class NumericalError(OUBreakError, ArithmeticError):
    """A linear system is singular, indefinite or too ill-conditioned."""


class BasisError(ValidationError):
    """A basis set failed its periodicity or orthonormality check."""

    def __init__(self, message: str, pair: tuple[int, int] | None = None, residual: float | None = None):
        super().__init__(message)
        self.pair = pair
        self.residual = residual
