"""Domain exceptions"""
from typing import Any, Optional


class AqfockError(Exception):
    """Base class for all library errors"""


class ParameterError(AqfockError, ValueError):
    """Invalid deformation parameters, dimensions or orders"""


class OutOfSupport(AqfockError, ValueError):
    """Density evaluated outside the open support interval"""

    def __init__(self, x: float, hi: float):
        super().__init__(f"x={x} outside support (-{hi}, {hi})")
        self.x = x
        self.hi = hi


class NearPole(AqfockError, ArithmeticError):
    """Density denominator too close to zero"""


class NonExistence(AqfockError):
    """No radial Bargmann representation exists for the requested parameters"""

    def __init__(self, verdict: Any):
        super().__init__(verdict.reason)
        self.verdict = verdict


class SingularGram(AqfockError, ArithmeticError):
    """Gram matrix of the (alpha,q)-inner product is not invertible"""

    def __init__(self, message: str, condition: Optional[float] = None):
        super().__init__(message)
        self.condition = condition
