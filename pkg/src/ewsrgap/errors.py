"""Exception taxonomy shared by all modules.

Every error raised on purpose by this package is one of the classes
below, so callers can catch by family (ValueError / IndexError /
RuntimeError) or by exact type.
"""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of the operation."""


class DimensionMismatch(ValueError):
    """Matrix or vector shapes are inconsistent with each other."""


class NotHermitian(ValueError):
    """Input matrix deviates from its conjugate transpose beyond tolerance."""


class NotPositiveDefinite(ValueError):
    """A Hermitian matrix has a nonpositive pivot where HPD is required."""


class IndefiniteMatrix(ValueError):
    """A matrix required to be PSD has a significantly negative eigenvalue."""


class NoConvergence(RuntimeError):
    """An iterative kernel exhausted its iteration budget."""


class DegenerateSpectrum(ValueError):
    """Eigenvalues are equal or nearly equal where distinctness is required."""


class UnsupportedCase(ValueError):
    """The requested method is not valid for the given configuration."""


class ParseError(ValueError):
    """A document could not be parsed; carries location context."""

    def __init__(self, message, *, line=None, field=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.field = field


class ValidationError(ValueError):
    """A parsed document violates a structural invariant, named in the message."""


class IndexOutOfRange(IndexError):
    """A user or cell index is outside the scenario's range."""
