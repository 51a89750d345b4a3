"""Exception hierarchy.

Input and validation problems derive from :class:`ValidationError`
(CLI exit code 1); numerical failures and resource caps derive from
:class:`NumericalError` (CLI exit code 2).
"""


class StrongConverseError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(StrongConverseError, ValueError):
    pass


class NumericalError(StrongConverseError, ArithmeticError):
    pass


class NonHermitian(ValidationError):
    pass


class NotDensity(ValidationError):
    """Trace, positivity or reconstruction check failed."""


class EtaSingular(ValidationError):
    pass


class SingularPower(ValidationError):
    pass


class SingularDensity(ValidationError):
    pass


class DimMismatch(ValidationError):
    pass


class AlphaOutOfRange(ValidationError):
    pass


class TolOutOfRange(ValidationError):
    pass


class KappaOutOfRange(ValidationError):
    pass


class NotCommuting(ValidationError):
    pass


class PositiveLogFactor(ValidationError):
    pass


class BadBlockParams(ValidationError):
    pass


class OrderViolation(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class InvalidTest(ValidationError):
    """Operator spectrum outside [0, 1] or scale outside [0, 1]."""


class ConvergenceFailure(NumericalError):
    pass


class DenseCapExceeded(NumericalError):
    pass


class TypeCapExceeded(NumericalError):
    pass


class BisectionFailure(NumericalError):
    pass


class MissingInput(ValidationError):
    """A pair file path that does not exist and is not a fixture name."""


class MalformedPairFile(ValidationError):
    pass
