"""Exception types raised by qrev."""


class QrevError(Exception):
    """Base class for all qrev errors."""


class InvalidDimensionError(QrevError, ValueError):
    pass


class NotSymmetricError(QrevError, ValueError):
    """Input expected to be symmetric (or Hermitian) is not, beyond tolerance."""


class UnphysicalStateError(QrevError, ValueError):
    """Covariance matrix or parameters violate positivity / the uncertainty relation."""


class DivergenceError(QrevError, ArithmeticError):
    """The requested quantity is infinite, e.g. reversal into a pure nonclassical state."""


class SpecFormatError(QrevError, ValueError):
    """Malformed state-spec file. Carries the offending line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
