"""Exception hierarchy shared by all modules."""


class SFDEError(Exception):
    """Base class for every error raised by ordersfde."""


# segments and histories
class SkeletonMismatch(SFDEError, ValueError):
    """Two segments cannot be aligned (different dimension or delay length)."""


class OutOfRange(SFDEError, ValueError):
    """A time or theta lies outside the covered interval."""


# noise
class InvalidHorizon(SFDEError, ValueError):
    pass


class ZeroStep(SFDEError, ValueError):
    pass


class UnsortedEvents(SFDEError, ValueError):
    pass


class UnknownMark(SFDEError, ValueError):
    pass


# coefficients
class ExprSyntaxError(SFDEError, ValueError):
    """Parse failure in a coefficient expression.

    ``position`` is the 0-based character offset of the offending token
    (``len(text)`` for unexpected end of input).
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownSymbol(SFDEError, ValueError):
    pass


class ThetaOutOfRange(SFDEError, ValueError):
    pass


class NonFiniteCoefficient(SFDEError, ArithmeticError):
    pass


class UnknownName(SFDEError, KeyError):
    pass


class BadParams(SFDEError, ValueError):
    pass


# solver
class NonFiniteState(SFDEError, ArithmeticError):
    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class ConfigMismatch(SFDEError, ValueError):
    pass


# order checks
class SamplerContractBroken(SFDEError, AssertionError):
    pass


class OrderPreconditionError(SFDEError, ValueError):
    """Initial segments handed to an order check are not ordered."""


# existence
class RangeExceeded(SFDEError, OverflowError):
    pass
