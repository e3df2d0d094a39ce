"""Exception types shared across the package."""


class HeliosError(Exception):
    """Base class for all package-specific errors."""


class ZeroArgument(HeliosError, ValueError):
    """Radial special function evaluated at z = 0."""


class StabilityLoss(HeliosError, ArithmeticError):
    """Runtime Wronskian validation of a Bessel recurrence failed."""


class DomainError(HeliosError, ValueError):
    """Argument outside the mathematical domain (e.g. |t| > 1 for P_l)."""


class ArgumentError(HeliosError, ValueError):
    """Structurally invalid argument (wrong count, sign, or shape)."""


class DegeneratePolygon(HeliosError, ValueError):
    """Polygon with near-zero area, repeated vertices, or self-intersection."""


class UnresolvedOscillation(HeliosError, ValueError):
    """Quadrature rule too coarse for the requested wavenumber."""


class MeaningMismatch(HeliosError, ValueError):
    """Partial-wave coefficients used in a role their meaning tag forbids."""


class TailNotResolved(HeliosError, ValueError):
    """Spectral tail of a projection is not small; increase lmax."""


class SectorViolation(HeliosError, ValueError):
    """Complex wavenumber outside the requested sector 0 < arg k < pi/2 - delta."""


class WindowUnderresolved(HeliosError, ValueError):
    """Wavenumber grid too coarse for the requested averaging window."""


class ConfigError(HeliosError, ValueError):
    """Malformed or contradictory CLI/config input."""


class CheckFailed(HeliosError, RuntimeError):
    """A runtime consistency check failed; outputs were not written."""
