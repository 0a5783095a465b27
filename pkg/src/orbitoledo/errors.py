"""Exception hierarchy shared by all modules."""


class OrbiError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(OrbiError, ValueError):
    """Malformed or inconsistent input data."""


class NonIntegralGenus(ValidationError):
    pass


class ZeroEulerCharacteristic(ValidationError):
    pass


class NotHyperbolic(ValidationError):
    pass


class ZeroVector(ValidationError):
    pass


class IsotropicBase(ValidationError):
    pass


class NonNegativePoint(ValidationError):
    pass


class BaseMismatch(ValidationError):
    pass


class DegeneratePlane(ValidationError):
    pass


class CoincidentPoints(ValidationError):
    pass


class NotInSU21(ValidationError):
    pass


class IncompatibleRepresentation(ValidationError):
    pass


class NumericalError(OrbiError, ArithmeticError):
    """A numerical procedure could not deliver the requested accuracy."""


class NoConvergence(NumericalError):
    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class DerivativeBreakdown(NumericalError):
    pass
