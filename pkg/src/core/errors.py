class SedjocoError(Exception):
    """Base class for numerical failures of the estimator and its analysis."""


class SingularCovarianceError(SedjocoError):
    """SCV covariance is not positive definite (Cholesky failed)."""


class SingularJacobianError(SedjocoError):
    """Jacobian condition estimate exceeds the guard threshold."""

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = condition


class NoConvergenceError(SedjocoError):
    """Iterative solver exhausted its iteration budget."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class GridPointError(SedjocoError):
    """A solver error raised while processing one experiment grid point."""

    def __init__(self, label: str, cause: Exception):
        super().__init__(f"grid point {label}: {cause}")
        self.label = label
        self.cause = cause


__all__ = [
    "SedjocoError",
    "SingularCovarianceError",
    "SingularJacobianError",
    "NoConvergenceError",
    "GridPointError",
]
