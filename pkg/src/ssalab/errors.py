"""Exception hierarchy shared by all ssalab modules."""


class SsaLabError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(SsaLabError):
    """Structural problem: non-square input, asymmetry, incompatible partition."""


class DomainError(SsaLabError):
    """A value (eigenvalue, argument, interval) falls outside a function's domain."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending


class ConvergenceError(SsaLabError):
    """An iterative numerical routine failed to reach its tolerance."""


class QuadratureError(SsaLabError):
    """Adaptive quadrature exhausted its node budget before stabilizing."""


class ParseError(SsaLabError):
    """Malformed textual input (expression, matrix file, spec string)."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class DegeneratePoints(SsaLabError):
    """Point configuration too clustered for a divided-difference matrix."""


class SingularError(SsaLabError):
    """Exact-arithmetic matrix is singular where an inverse is required."""


class UnknownFunction(SsaLabError):
    """Requested catalog function name does not exist."""


class ParamOutOfRange(SsaLabError):
    """A parameter value violates its documented legal range."""
