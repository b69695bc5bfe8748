"""Exception types shared across the package."""


class RelboundError(Exception):
    """Base class for all relbound errors."""


class StructureParseError(RelboundError):
    """Structure expression could not be parsed."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class StructureError(RelboundError):
    """Invalid structure tree: bad component ids, empty children, k out of range."""


class DegenerateSampleError(RelboundError):
    """All log lifetimes identical, so the scale cannot be estimated."""


class BoundaryError(RelboundError):
    """Reliability argument sits on the boundary of (0, 1) where the transform is undefined."""


class EstimationError(RelboundError):
    """Point estimation failed: non-convergence, insufficient data, or singular information."""


class ConfigError(RelboundError):
    """Request or study configuration file is malformed."""
