"""Exception types shared across the package."""


class EsymError(Exception):
    """Base class for all package errors."""


class RegionError(EsymError):
    """A point lies outside the validity domain of a chart."""


class FrameError(EsymError):
    """Inconsistent frame data (shapes, indices, skew-symmetry, ...)."""


class SingularTermError(EsymError):
    """A singular ledger term is not admissible for the given frame."""


class DegenerateMetricError(EsymError):
    """The metric matrix is singular at the requested point."""


class ConfigError(EsymError):
    """A run configuration file is malformed or inconsistent."""


class IntegrationAbort(EsymError):
    """The vector field produced a non-finite value during integration.

    Carries the offending time and state for diagnosis.
    """

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state
