"""Exception types shared across the laboratory."""


class GeometryDomainError(ValueError):
    """Invalid geometric input (point outside the model, bad parameter range)."""


class DegenerateAngleError(GeometryDomainError):
    """Angle requested at a vertex equal to one of its targets."""


class CollinearPointsError(GeometryDomainError):
    """Triple excluded by a collinearity hypothesis; callers treat it as a skip signal."""


class ShootingError(RuntimeError):
    """Geodesic boundary-value solve failed to converge.

    Carries the last root bracket for diagnosis.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class PrecisionError(RuntimeError):
    """Truncated ideal-limit estimate exceeded the caller's tolerance.

    Carries both iterates (value at T and at 2T).
    """

    def __init__(self, message, value_t, value_2t):
        super().__init__(message)
        self.value_t = value_t
        self.value_2t = value_2t


class PinchingViolationError(ValueError):
    """Curvature profile left the [-b^2, -a^2] pinching band at some node."""

    def __init__(self, message, node_r):
        super().__init__(message)
        self.node_r = node_r


class WalkBudgetError(RuntimeError):
    """One or more walks exhausted max_steps without exiting."""

    def __init__(self, message, failed_indices):
        super().__init__(message)
        self.failed_indices = failed_indices


class InsufficientSamplesError(RuntimeError):
    """Cap-ratio denominator ran out of samples at the first failing cap radius."""

    def __init__(self, message, failing_alpha):
        super().__init__(message)
        self.failing_alpha = failing_alpha


class UnsupportedSpaceError(TypeError):
    """Operation requires a model space variant it was not given."""


class FitFailureError(RuntimeError):
    """Constant fitting found no finite constant on the supplied grid."""
