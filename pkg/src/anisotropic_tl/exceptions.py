"""Exception hierarchy shared by all toolkit modules."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class NotExpansiveError(ToolkitError, ValueError):
    """Raised when a matrix has an eigenvalue of modulus at most 1 + tolerance."""

    def __init__(self, modulus: float):
        self.modulus = modulus
        super().__init__(f"matrix is not expansive: eigenvalue modulus {modulus:.12g} <= 1")


class SingularMatrixError(ToolkitError, ValueError):
    """Raised for matrices that are singular to working tolerance."""


class ThetaRangeError(ToolkitError, ValueError):
    """Raised when an ellipsoid contraction parameter is outside (rho(A^-1), 1)."""


class SeriesTruncationError(ToolkitError, RuntimeError):
    """Raised when the ellipsoid series does not reach its tail tolerance."""


class ScaleBracketError(ToolkitError, RuntimeError):
    """Raised when the scale index search leaves the admissible window."""


class GridResolutionError(ToolkitError, ValueError):
    """Raised when a grid is too coarse or too small for the requested object."""


class TruncationError(ToolkitError, RuntimeError):
    """Raised when a dilated profile loses too much mass to the frequency box."""

    def __init__(self, fraction: float, index: int):
        self.fraction = fraction
        self.index = index
        super().__init__(f"dilate {index} truncated by the frequency box: fraction {fraction:.3e}")


class ScaleRangeError(ToolkitError, ValueError):
    """Raised when an explicit scale range misses scales with nonvanishing convolutions."""


class WindowTooSmallError(ToolkitError, ValueError):
    """Raised when a Peetre window edge weight is above the configured limit."""


class HypothesisError(ToolkitError, ValueError):
    """Raised when a sweep finds a counterexample to an assumed weight comparison."""

    def __init__(self, message: str, pair: tuple[int, int]):
        self.pair = pair
        super().__init__(f"{message} (counterexample i={pair[0]}, j={pair[1]})")


class PreconditionError(ToolkitError, ValueError):
    """Raised when an operation or experiment precondition fails."""


class PlantingError(ToolkitError, RuntimeError):
    """Raised when no admissible atom configuration exists in the sweep range."""


class ConfigError(ToolkitError, ValueError):
    """Raised for unreadable or malformed configuration files."""


class FieldFormatError(ToolkitError, ValueError):
    """Raised for malformed matrix, sequence or field files."""
