"""Exception hierarchy shared by all modules."""


class ThetaSchlesingerError(Exception):
    """Base class for every error raised by the package."""


class QuadratureError(ThetaSchlesingerError):
    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates


class DerivativeUnreliableError(ThetaSchlesingerError):
    pass


class SingularMatrixError(ThetaSchlesingerError):
    pass


class RootFindingError(ThetaSchlesingerError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class ConfigurationError(ThetaSchlesingerError, ValueError):
    """Invalid branch configuration (coinciding points, crossing cuts, ...)."""


class BranchAmbiguityError(ThetaSchlesingerError):
    """A point lies on a cut where the sheet of ``w`` is undefined."""


class PathError(ThetaSchlesingerError):
    pass


class DomainError(ThetaSchlesingerError, ValueError):
    pass


class TruncationError(ThetaSchlesingerError):
    pass


class CharacteristicKindError(ThetaSchlesingerError, ValueError):
    pass


class ReducibleCaseError(ThetaSchlesingerError, ValueError):
    """Half-integer characteristic: all monodromies commute."""


class DivisorSingularityError(ThetaSchlesingerError):
    """The theta function vanishes where the construction divides by it."""


class PreconditionError(ThetaSchlesingerError, ValueError):
    pass


class DegenerateSolutionError(ThetaSchlesingerError, ValueError):
    """Excluded characteristic for the elliptic Painleve VI formulas."""


class SingularSampleError(ThetaSchlesingerError):
    """A Painleve sample sits on a pole or a vanishing denominator."""


class ModuleInversionError(ThetaSchlesingerError):
    pass
