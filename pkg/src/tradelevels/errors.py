"""Exception and warning types shared across the package."""


class TradeLevelsError(Exception):
    """Base class for all package errors."""


class DomainError(TradeLevelsError, ValueError):
    """A value or model-parameter precondition was violated."""


class GridMismatchError(DomainError):
    """Two grids that must be identical differ in range or resolution."""


class LevelBreakdownError(DomainError):
    """The cubic level equation has no root on the physical branch."""

    def __init__(self, n: int, lam: float, beta: float):
        self.n = n
        self.lam = lam
        self.beta = beta
        super().__init__(
            f"level n={n} breaks down: lambda={lam!r} gives beta={beta!r} "
            "below the branch limit -2/(3*sqrt(3))"
        )


class ResolutionError(DomainError):
    """Grid too coarse: eigenvalues not converged under refinement."""


class CsvParseError(TradeLevelsError, ValueError):
    """Malformed input file.  ``line`` is 1-based (header is line 1)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TruncationWarning(UserWarning):
    """Amplitude or spectrum does not decay at the grid boundary."""
