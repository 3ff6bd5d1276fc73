"""Exception types raised across the package."""


class RspError(Exception):
    """Base class for all package errors."""


class DimensionError(RspError, ValueError):
    """Operand shapes are incompatible."""


class DomainError(RspError, ValueError):
    """A scalar parameter lies outside its allowed range."""


class NotPSDError(RspError, ValueError):
    """Matrix has an eigenvalue below the PSD clamp floor."""


class NumericError(RspError, ArithmeticError):
    """A closed-form expression produced an invalid intermediate value."""


class DegeneratePostselectionError(RspError):
    """The post-selected outcome has (numerically) zero probability."""


class UnsupportedCorrectionError(RspError, ValueError):
    """No result-0 correction exists for the requested ensemble."""


class NotInformationallyCompleteError(RspError, ValueError):
    """Measurement settings do not determine the density matrix."""


class NonConvergenceError(RspError, RuntimeError):
    """Optimizer hit its evaluation cap; ``best`` holds the best iterate found."""

    def __init__(self, message, best=None, value=None):
        super().__init__(message)
        self.best = best
        self.value = value
