"""Exception types shared across the package."""


class PolyakernError(Exception):
    """Base class for errors raised by this package."""


class ConvergenceError(PolyakernError):
    """A series or continued-fraction evaluation failed to converge."""


class QuadratureError(PolyakernError):
    """A numerical integration routine could not reach the requested accuracy."""


class SpectralMismatchError(QuadratureError):
    """Two independent routes to a spectral value disagree beyond tolerance."""

    def __init__(self, message, first, second):
        super().__init__(message)
        self.first = first
        self.second = second


class NumericalError(PolyakernError):
    """A linear-algebra routine produced an unusable result (non-finite
    values, or a solution whose residual exceeds tolerance)."""


class InfiniteTiltError(PolyakernError):
    """The reciprocal-moment integral of a distribution diverges, so the
    size-biased-in-reverse decomposition does not exist."""


class ParseError(PolyakernError, ValueError):
    """A textual input (spec string or data file) could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
