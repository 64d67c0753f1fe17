"""Exception types shared across the package."""


class CovartailError(Exception):
    """Base class for all package-specific errors."""


class BracketError(CovartailError, ValueError):
    """Root finding called without a valid sign-change bracket."""

    def __init__(self, lo, hi, flo, fhi):
        self.lo, self.hi, self.flo, self.fhi = lo, hi, flo, fhi
        super().__init__(
            f"root not bracketed on [{lo!r}, {hi!r}]: f(lo)={flo!r}, f(hi)={fhi!r}"
        )


class NumericError(CovartailError, ArithmeticError):
    """A numeric routine produced or encountered a non-finite value."""


class WrongRegimeError(CovartailError, ValueError):
    """A tail-model operation was called on a model of the wrong regime."""


class OutOfRangeError(CovartailError, ValueError):
    """A probability level lies outside the valid range of a tail model.

    Carries the attainable supremum so callers can report it.
    """

    def __init__(self, message, b_inf=None):
        self.b_inf = b_inf
        super().__init__(message)


class OptimizationError(CovartailError, RuntimeError):
    """Derivative-free minimization failed for every start point."""

    def __init__(self, message, trace=()):
        self.trace = tuple(trace)
        super().__init__(message)


class DataError(CovartailError, ValueError):
    """Malformed or insufficient input data (CSV rows, column types, dates)."""


class ComputationError(CovartailError, RuntimeError):
    """A pipeline computation failed for every unit of work."""
