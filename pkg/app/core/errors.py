from typing import Optional


class DistortionError(ValueError):
    """Base class for domain errors raised by the distortion services."""


class OutOfDomainError(DistortionError):
    """A point lies outside the domain where a map is defined."""


class DegeneratePointError(DistortionError):
    """The differential is singular (pole, zero determinant) or has the wrong orientation."""


class NotConformalError(DistortionError):
    pass


class RegionError(DistortionError):
    pass


class RankDeficientError(DistortionError):
    pass


class ExpressionParseError(DistortionError):
    def __init__(self, message: str, position: int, source: Optional[str] = None):
        self.position = position
        self.source = source
        super().__init__(f"{message} at offset {position}")


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
