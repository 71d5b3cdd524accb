"""Exception hierarchy for tauberkit."""

from __future__ import annotations


class TauberkitError(Exception):
    """Base class for all errors raised by this package."""


class RateSyntaxError(TauberkitError, ValueError):
    """The rate DSL string does not match the grammar."""

    def __init__(self, message: str, position: int, source: str = ""):
        self.position = position
        self.source = source
        pointer = f"\n  {source}\n  {' ' * position}^" if source else ""
        super().__init__(f"{message} at position {position}{pointer}")


class RateSemanticError(TauberkitError, ValueError):
    """The rate DSL parsed, but a parameter is out of range."""


class UnboundedSearchError(TauberkitError, ArithmeticError):
    """Bracket expansion hit the search ceiling without reaching the target."""


class DegenerateRateError(TauberkitError, ArithmeticError):
    """The right-inverse is zero, so the predicted rate is undefined."""


class PoleError(TauberkitError, ArithmeticError):
    """Evaluation point lies within the guard distance of a pole."""

    def __init__(self, factor: str, point: complex, distance: float):
        self.factor = factor
        self.point = point
        self.distance = distance
        super().__init__(
            f"{factor}: point {point!r} is {distance:.3g} from a pole (guard 1e-8)"
        )


class OutOfStripError(TauberkitError, ValueError):
    """Point outside the pole-free continuation domain of the transform."""


class StripExceedsDomainError(OutOfStripError):
    """A requested strip S_{k,c} reaches past the continuation domain."""


class ToleranceNotMetError(TauberkitError, ArithmeticError):
    """Quadrature could not reach the requested tolerance within its budget."""

    def __init__(self, message: str, result=None):
        self.result = result
        super().__init__(message)


class ParameterError(TauberkitError, ValueError):
    """Incompatible or out-of-range numerical parameters."""


class ConstraintViolation(TauberkitError, ValueError):
    """A parameter inequality required by the witness construction fails."""

    def __init__(self, inequality: str, detail: str = ""):
        self.inequality = inequality
        super().__init__(f"constraint violated: {inequality}" + (f" ({detail})" if detail else ""))


class DerivativeCheckError(TauberkitError, ArithmeticError):
    """Closed-form derivative disagrees with the finite-difference check."""
