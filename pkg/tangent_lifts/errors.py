"""Exception hierarchy for tangent_lifts.

Every exception carries the CLI exit code it maps to, so the command line
layer can translate failures without knowing where they were raised.
"""

from .constants import EXIT_NUMERICAL, EXIT_USAGE, EXIT_VERIFICATION_FAILED


class TangentLiftsError(Exception):
    """Base class for all errors raised by tangent_lifts"""

    exit_code = EXIT_NUMERICAL


class ConfigError(TangentLiftsError, ValueError):
    """Invalid configuration or command line usage"""

    exit_code = EXIT_USAGE


class ExpressionError(TangentLiftsError, ValueError):
    """Base class for expression parse failures"""

    exit_code = EXIT_USAGE


class ExpressionSyntaxError(ExpressionError):
    """Malformed expression text.

    Attributes:
        offset: Byte offset into the source text where parsing failed
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExpressionError):
    pass


class VariableIndexError(ExpressionError):
    pass


class NumericalError(TangentLiftsError):
    """Base class for failures while evaluating numbers"""

    exit_code = EXIT_NUMERICAL


class ExpressionDomainError(NumericalError, ArithmeticError):
    """Expression evaluated outside its real domain"""


class SingularMetricError(NumericalError):
    pass


class ExcludedRegionError(NumericalError):
    pass


class SamplingError(NumericalError):
    pass


class IntegrationError(NumericalError):
    pass


class GeometryIdentityError(NumericalError):
    """An identity that must hold pointwise was violated beyond tolerance"""


class SkewnessError(TangentLiftsError, ValueError):
    """A matter lift generator is not skew with respect to the metric.

    Attributes:
        max_violation: Largest |A_(ab)| found at the sample points
    """

    exit_code = EXIT_VERIFICATION_FAILED

    def __init__(self, message: str, max_violation: float):
        super().__init__(message)
        self.max_violation = max_violation


class DegenerateSprayError(NumericalError):
    """The geodesic spray vanishes at the phase point (p = 0)"""
