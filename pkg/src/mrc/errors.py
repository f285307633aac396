"""Exception types shared across the package."""


class MrcError(Exception):
    """Base class for all package errors."""


class ConfigError(MrcError):
    """Invalid configuration: bad parameters, missing files, malformed JSON."""


class GeometryError(MrcError):
    """Invalid surface: non-positive radius, under-resolved quadrature."""


class SolverError(MrcError):
    """Degenerate least-squares system (all singular values truncated)."""
