"""Exception hierarchy shared across the package."""


class FbmInfoflowError(Exception):
    """Base class for all package errors."""


class DomainError(FbmInfoflowError):
    """Input outside the declared working domain (negative time, x out of range, ...)."""


class UnsupportedOrder(FbmInfoflowError):
    """Derivative order above what the model carries."""


class GridError(FbmInfoflowError):
    """Time grid incompatible with the requested sampler."""


class FlowEscapeError(FbmInfoflowError):
    """The Doss-Sussmann flow left the diffusion coefficient's working domain."""

    def __init__(self, message, exit_z=None):
        super().__init__(message)
        self.exit_z = exit_z


class RangeError(FbmInfoflowError):
    """Value outside the range of the tabulated flow."""


class DegenerateTimeError(FbmInfoflowError):
    """t = 0 requested where the law is a point mass and has no density."""


class TailError(FbmInfoflowError):
    """Density underflow in the tail; caller must truncate the domain."""


class QuadratureError(FbmInfoflowError):
    """Adaptive quadrature failed to converge."""

    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class SupportError(FbmInfoflowError):
    """Support of p not contained in support of q."""


class StepError(FbmInfoflowError):
    """Finite-difference step incompatible with the evaluation time."""


class ResolutionError(FbmInfoflowError):
    """Grid too coarse for the requested operation."""


class ConfigError(FbmInfoflowError):
    """Invalid CLI / suite configuration."""
