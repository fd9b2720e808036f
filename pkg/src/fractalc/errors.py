"""Exception hierarchy shared by all modules."""


class FractalcError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FractalcError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceError(FractalcError):
    """An enumeration would exceed the configured cap."""


class InsufficientNeighborsError(FractalcError):
    pass


class DegenerateDenominatorError(FractalcError, ArithmeticError):
    pass


class SingularityError(FractalcError, ArithmeticError):
    """A profile or coefficient is evaluated at an excluded singular point."""

    def __init__(self, message: str, location: float | None = None):
        super().__init__(message)
        self.location = location


class BlowUpError(FractalcError, ArithmeticError):
    def __init__(self, message: str, location: float | None = None):
        super().__init__(message)
        self.location = location


class StepSizeError(FractalcError):
    pass


class OverflowGuardError(FractalcError, OverflowError):
    pass


class ZeroCrossingError(SingularityError):
    """A solution component passes through zero where it must not."""


class InvalidParticularError(FractalcError):
    pass


class AllPointsExcludedError(FractalcError):
    pass


class MissingDerivativeError(FractalcError):
    pass


class NonPositiveGroundStateError(DomainError):
    pass


class NonIntegrableError(FractalcError):
    pass
