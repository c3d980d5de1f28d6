"""Exception hierarchy shared by all solver modules."""


class FewBodyError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(FewBodyError, ValueError):
    """Inputs are inconsistent; raised before any numerical work."""


class InvalidBasis(ValidationError):
    pass


class InvalidSymmetry(ValidationError):
    pass


class InvalidIndex(ValidationError, IndexError):
    pass


class ShapeMismatch(ValidationError):
    pass


class NonCentralPotential(ValidationError):
    pass


class UnsupportedComplexEvaluation(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class NumericalFailure(FewBodyError, ArithmeticError):
    """A numerical step produced unusable results."""


class DegenerateBasis(NumericalFailure):
    pass


class IntegrationFailure(NumericalFailure):
    pass


class NoSolution(NumericalFailure):
    pass
