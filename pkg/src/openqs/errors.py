"""Exception hierarchy.

Validation errors (bad inputs, violated invariants) derive from ``ValidationError``
and map to CLI exit code 2. Numerical failures derive from ``NumericalError``.
"""


class OpenQSError(Exception):
    """Base class for all library errors."""


class ValidationError(OpenQSError, ValueError):
    """An input violates a declared invariant."""


class NumericalError(OpenQSError, RuntimeError):
    """A numerical procedure failed to meet its error bound."""


class NotHermitian(ValidationError):
    pass


class NotUnitTrace(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BlochOutOfBall(ValidationError):
    pass


class ChoiNotPSD(ValidationError):
    pass


class FOutOfRange(ValidationError):
    pass


class NegativeTime(ValidationError):
    pass


class NotQubit(ValidationError):
    pass


class CovarianceNotPSD(ValidationError):
    pass


class InputNotPure(ValidationError):
    pass


class TauOutOfRange(ValidationError):
    pass


class OutOfDomain(ValidationError):
    """A closed form is evaluated where it has no finite value."""


class IntegralNotConverged(NumericalError):
    pass


class IntegrationToleranceExceeded(NumericalError):
    pass
