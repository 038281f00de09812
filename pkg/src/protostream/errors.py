"""Exception types shared across the package."""


class ProtostreamError(Exception):
    """Base class for all errors raised by this package."""


class EmptyModelError(ProtostreamError):
    """Raised when a nearest-set query or prediction is made against an empty model."""


class EmptyCandidatesError(ProtostreamError):
    """Raised when asked to sample uniformly from an empty candidate list."""


class EmptyStreamError(ProtostreamError):
    """Raised when a run or generation request covers zero steps."""


class DimensionMismatchError(ProtostreamError):
    """Raised when two points of different dimension reach a coordinate metric."""


class PositionOutOfRangeError(ProtostreamError):
    """Raised when an index removal names a position outside the live sequence."""


class ConfigError(ProtostreamError):
    """Raised for invalid, unknown, or malformed configuration values."""
