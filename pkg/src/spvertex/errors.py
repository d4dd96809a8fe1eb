"""Exception hierarchy shared by all modules."""


class SpVertexError(Exception):
    """Base class for errors raised by this package."""


class InvalidRankError(SpVertexError, ValueError):
    pass


class SizeError(SpVertexError, ValueError):
    """A dense or matrix-free size budget would be exceeded."""


class DomainError(SpVertexError, ValueError):
    pass


class NotAProjectorError(SpVertexError, ValueError):
    pass


class FusionConsistencyError(SpVertexError, RuntimeError):
    pass


class ConvergenceError(SpVertexError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class AmbiguousBranchError(SpVertexError, RuntimeError):
    pass


class ContourError(SpVertexError, RuntimeError):
    pass


class PolynomialityError(SpVertexError, RuntimeError):
    pass


class DegreeDeficientError(SpVertexError, ValueError):
    pass


class BranchError(SpVertexError, ValueError):
    """The tracked eigenvalue is not real positive where a real root is needed."""


class NormalizationError(SpVertexError, ZeroDivisionError):
    pass


class PoleError(SpVertexError, ValueError):
    pass


class PrecisionError(SpVertexError, RuntimeError):
    pass


class ConfigError(SpVertexError, ValueError):
    pass
