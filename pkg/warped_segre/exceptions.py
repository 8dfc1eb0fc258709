"""Exception classes for warped-segre."""

from typing import Any, Optional


class WarpedSegreException(Exception):
    """Base exception for all warped-segre errors."""

    exit_code = 1


class ValidationError(WarpedSegreException, ValueError):
    """Raised when input validation fails."""

    exit_code = 2


class DimensionMismatchError(ValidationError):
    """Raised when two vectors live in spaces of different dimension."""

    pass


class ShapeMismatchError(ValidationError):
    """Raised when two points belong to different manifold shapes."""

    pass


class BaseMismatchError(ValidationError):
    """Raised when tangent vectors are not attached to the expected base point."""

    pass


class InfeasibleSignPatternError(ValidationError):
    """Raised when a sign pattern is not a deck transform of the covering."""

    pass


class SizeCapExceeded(ValidationError):
    """Raised when a dense tensor would exceed the configured entry cap."""

    def __init__(self, message: str, entries: int, cap: int):
        super().__init__(message)
        self.entries = entries
        self.cap = cap


class GeometryError(WarpedSegreException):
    """Raised when a geometric operation is undefined for its arguments."""

    exit_code = 3


class AntipodalError(GeometryError):
    """Raised when a spherical logarithm is requested between antipodal points."""

    pass


class AntipodalFactorError(AntipodalError):
    """Raised when a pair of corresponding factors is antipodal."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class DomainError(GeometryError):
    """Raised when a tangent vector lies outside the domain of the exponential map."""

    pass


class IncompatibleError(GeometryError):
    """Raised when two pre-Segre points are not alpha-compatible."""

    def __init__(self, message: str, alpha_m: Optional[float] = None):
        super().__init__(message)
        self.alpha_m = alpha_m


class NotConnectedError(GeometryError):
    """Raised when two rank-1 tensors have no minimizing geodesic between them."""

    def __init__(self, message: str, alpha_m: Optional[float] = None):
        super().__init__(message)
        self.alpha_m = alpha_m


class UnsupportedPlaneError(GeometryError):
    """Raised for 2-planes whose sectional curvature has no closed form here."""

    pass


class ConvergenceError(WarpedSegreException):
    """Raised when an iterative method does not converge."""

    exit_code = 4


class MaxItersExceeded(ConvergenceError):
    """Raised when an iteration cap is hit before the tolerance is met."""

    def __init__(
        self,
        message: str,
        last_iterate: Any = None,
        grad_norm: Optional[float] = None,
        iterations: Optional[int] = None,
    ):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.grad_norm = grad_norm
        self.iterations = iterations
