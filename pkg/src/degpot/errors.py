"""Exception types shared across the package."""


class DegpotError(Exception):
    """Base class for all library errors."""


class DomainError(DegpotError, ValueError):
    """Argument outside its admissible interval (e.g. t not in [0, T])."""


class AssumptionError(DegpotError):
    """Operation requires a coefficient property that does not hold."""


class GeometryError(DegpotError):
    """Invalid geometric request (offset beyond reach, bad shape, ...)."""


class ResolutionError(DegpotError, ValueError):
    """Requested discretization is too coarse."""


class SupportError(DegpotError):
    """Density support violates a strict-interior requirement."""


class CompatibilityError(DegpotError):
    """Boundary datum violates g(., 0) = 0."""


class ConvergenceError(DegpotError):
    """An iterative or extrapolation procedure failed to contract."""


class ConfigError(DegpotError, ValueError):
    """Malformed or semantically invalid run configuration."""


class SolverError(DegpotError):
    """Linear-algebra failure (singular or ill-conditioned block)."""
