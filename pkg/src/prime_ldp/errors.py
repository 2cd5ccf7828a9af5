"""Exception hierarchy shared by every module."""


class PrimeError(Exception):
    """Base class for all package errors."""


class InvalidParametersError(PrimeError, ValueError):
    """Model or configuration parameters violate their contract."""


class InvalidPrivacyBudgetError(InvalidParametersError):
    """Privacy budget epsilon must be strictly positive."""


class DataError(PrimeError):
    """Malformed or unreadable input data."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalFailure(PrimeError, ArithmeticError):
    """A numerical routine could not produce a trustworthy answer."""


class RegularizationFailure(NumericalFailure):
    def __init__(self, min_h):
        self.min_h = float(min_h)
        super().__init__(
            f"regularized degree matrix is not positive (min H_ii = {self.min_h:.6g}); "
            "increase tau"
        )


class DegenerateGeometry(NumericalFailure):
    """Simplex vertices are affinely dependent or otherwise unusable."""


class VertexHuntInfeasible(NumericalFailure):
    """Too few nodes survive truncation to hunt for simplex vertices."""
