"""Exception types shared across the package."""


class CurvforgeError(Exception):
    """Base class for all package errors."""


class DomainError(CurvforgeError, ValueError):
    """Point outside the chart, or too close to its boundary."""


class NotPositiveDefiniteError(CurvforgeError, ValueError):
    pass


class DegeneratePlaneError(CurvforgeError, ValueError):
    pass


class GeodesicDomainExit(CurvforgeError):
    """Raised when a geodesic leaves the chart; carries the partial curve."""

    def __init__(self, exit_time, curve):
        super().__init__(f"geodesic left the chart at t = {exit_time:.6g}")
        self.exit_time = exit_time
        self.curve = curve


class PairingViolation(CurvforgeError):
    def __init__(self, max_violation):
        super().__init__(f"pairing condition g(c',.) = g~(c',.) violated, max {max_violation:.3e}")
        self.max_violation = max_violation


class HypothesisError(CurvforgeError):
    """A stated hypothesis of a lemma fails its numerical spot check."""

    def __init__(self, message, index=None, residual=None):
        super().__init__(message)
        self.index = index
        self.residual = residual


class InfeasibleError(CurvforgeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InvariantError(CurvforgeError, ValueError):
    """Constructor-level invariant violated (e.g. nonzero mean of I'')."""
