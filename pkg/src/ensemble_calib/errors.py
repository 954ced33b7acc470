"""Exception types shared across the package."""


class EnsembleCalibError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(EnsembleCalibError, ValueError):
    """Cholesky factorization hit a non-positive pivot.

    ``pivot`` is the zero-based index of the failing diagonal entry.
    """

    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (pivot {pivot})")


class DomainError(EnsembleCalibError, ValueError):
    """An argument lies outside the domain of the operation."""


class ShapeError(EnsembleCalibError, ValueError):
    """Array dimensions do not agree."""


class Saturated(EnsembleCalibError, ArithmeticError):
    """A tail probability cannot be resolved with the available samples."""

    def __init__(self, p: float, n_samples: int):
        self.p = p
        self.n_samples = n_samples
        super().__init__(
            f"probability {p:g} is below the resolution 1/{n_samples} of the sample set"
        )


class ConfigError(EnsembleCalibError, ValueError):
    """Invalid or unknown configuration entry; ``key`` names the offending field."""

    def __init__(self, key: str, message: str | None = None):
        self.key = key
        super().__init__(message or key)


class ParseError(EnsembleCalibError, ValueError):
    """Malformed input file; ``line`` is the 1-based line number (0 if unknown)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)
