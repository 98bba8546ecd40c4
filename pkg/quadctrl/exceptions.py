"""
Exception classes for quadctrl.

All exceptions inherit from the QuadCtrlError base class.
Input problems derive from SpecError so callers can catch every
"this system description is unusable" case at once.
"""

from typing import Optional


class QuadCtrlError(Exception):
    """Base exception for all quadctrl errors."""

    pass


class SpecError(QuadCtrlError, ValueError):
    """
    Malformed system specification.

    Attributes:
        field: Name of the offending spec field, when known.
        line: Line of a JSON decoding error, when known.
        column: Column of a JSON decoding error, when known.
    """

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        self.field = field
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f" (line {line}, column {column})"
        elif field is not None:
            location = f" (field '{field}')"
        super().__init__(f"{message}{location}")


class ShapeMismatchError(SpecError):
    """
    Matrix or vector with the wrong shape.

    - L must be n x n
    - a, b, c must have length n
    - there must be n - k control vectors of length n
    """

    pass


class DependentControlsError(SpecError):
    """The control vector fields are linearly dependent."""

    pass


class BadRankError(SpecError):
    """Underactuation rank k outside 1..n-1."""

    pass


class ParameterError(SpecError):
    """
    Model parameter out of range.

    - Lorenz sigma, rho, beta must be positive
    - rigid-body inertia entries xi must be positive
    - closed-form criteria need a nonzero control vector
    """

    pass


class ArithmeticModeError(QuadCtrlError, ValueError):
    """Rational and floating-point values mixed in one computation."""

    pass


class DimensionError(QuadCtrlError, ValueError):
    """Vector or matrix length does not match the ambient dimension."""

    pass


class WrongRankError(QuadCtrlError):
    """
    A rule was invoked on a system with the wrong underactuation rank.

    - the rank-one rule needs k = 1
    - the Hermes-Sussmann test needs a single input (k = n - 1)
    """

    pass


class ControlIndexError(QuadCtrlError, IndexError):
    """Control index outside 1..n-k."""

    pass


class ResourceCapError(QuadCtrlError):
    """The bracket enumeration exceeded its configured hard limit."""

    pass


class InapplicableModelError(QuadCtrlError):
    """
    Closed-form criterion used outside its hypotheses.

    Raised by the Lorenz single-input criterion when s = 0.
    """

    pass


class NonFiniteError(QuadCtrlError, ArithmeticError):
    """Integration produced NaN/inf or crossed the blow-up guard."""

    pass


class ReportSchemaError(QuadCtrlError, ValueError):
    """Report payload does not match the published schema."""

    pass
