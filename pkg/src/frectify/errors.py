"""Exception hierarchy shared by all frectify modules.

Two broad families matter for the CLI exit-code contract:
``ValidationError`` (bad input: exit 2) and ``NumericalError``
(a numerically infeasible request on valid input: exit 3).
"""

from __future__ import annotations


class FrectifyError(Exception):
    """Base class for all library errors."""


class ValidationError(FrectifyError):
    """Input fails a documented precondition or format requirement."""


class NumericalError(FrectifyError):
    """Computation cannot proceed numerically (singularity, range, ...)."""


class ExprSyntaxError(ValidationError):
    """Raised by the expression parser.

    Carries the byte offset of the offending token and the set of token
    descriptions that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = expected
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected: " + ", ".join(sorted(expected)) + ")"
        super().__init__(detail)


class UnknownFunctionError(ExprSyntaxError):
    """Function name not in the supported set."""

    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(f"unknown function {name!r}", offset)


class EvalDomainError(NumericalError):
    """Expression evaluation left the real domain.

    ``subexpr`` is the pretty-printed offending subexpression.
    """

    def __init__(self, message: str, subexpr: str):
        self.subexpr = subexpr
        super().__init__(f"{message} in subexpression {subexpr!r}")


class SignChangeError(ValidationError):
    """f changes sign on its domain; reports a bracketing subinterval."""

    def __init__(self, lo: float, hi: float):
        self.bracket = (lo, hi)
        super().__init__(f"f changes sign on [{lo:.9g}, {hi:.9g}]")


class NearZeroFunctionError(ValidationError):
    """|f| drops below the configured floor somewhere on the domain."""

    def __init__(self, where: float, value: float, floor: float):
        self.where = where
        self.value = value
        super().__init__(
            f"|f({where:.9g})| = {abs(value):.3g} is below the floor {floor:.3g}"
        )


class AnalyticPrimitiveMismatchError(ValidationError):
    """User-supplied analytic primitive disagrees with quadrature."""


class InversionRangeError(NumericalError):
    """Requested primitive value lies outside the attainable range."""

    def __init__(self, y: float, lo: float, hi: float):
        self.y = y
        self.attainable = (lo, hi)
        super().__init__(
            f"value {y:.9g} outside attainable range [{lo:.9g}, {hi:.9g}]"
        )


class OutOfDomainError(NumericalError):
    """Arclength argument outside a FunctionSpec domain."""


class NonRegularCurveError(NumericalError):
    """Curve speed vanishes (below threshold) at some parameter."""

    def __init__(self, where: float, speed: float):
        self.where = where
        self.speed = speed
        super().__init__(f"curve speed {speed:.3g} at parameter {where:.9g} is below threshold")


class VanishingCurvatureError(NumericalError):
    """Curvature below kappa_min where the frame is required."""

    def __init__(self, node_index: int, kappa: float):
        self.node_index = node_index
        self.kappa = kappa
        super().__init__(f"curvature {kappa:.3g} below threshold at node {node_index}")


class GuardBandError(NumericalError):
    """Parameter range violates the secant singularity guard."""


class DomainMismatchError(ValidationError):
    """FunctionSpec domain does not cover the curve arclength range."""


class DegenerateFitError(NumericalError):
    """Regression against a (numerically) constant regressor."""


class AxisExtractionError(NumericalError):
    """Helix axis is not constant within tolerance (or undefined)."""

    def __init__(self, message: str, drift: float | None = None):
        self.drift = drift
        super().__init__(message)


class NoisyRatioError(NumericalError):
    """torsion/curvature series too noisy for function recovery."""
