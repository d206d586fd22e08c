import logging
from dataclasses import dataclass, field

import numpy as np

from src.core.errors import NoConvergenceError
from src.core.model import DemixingSet, TargetSet
from src.sedjoco.equations import COND_LIMIT, jacobian, residual

logger = logging.getLogger(__name__)

MAX_HALVINGS = 20


@dataclass
class ConvergenceReport:
    """Iteration record of one Newton solve."""

    converged: bool = False
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    halvings: list[int] = field(default_factory=list)
    iterates: list[np.ndarray] = field(default_factory=list, repr=False)
    tol: float = 1e-10
    max_iter: int = 50

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else float("inf")

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "total_halvings": sum(self.halvings),
        }


def newton_solve(
    Q: TargetSet,
    B0: DemixingSet,
    tol: float = 1e-10,
    max_iter: int = 50,
    max_halvings: int = MAX_HALVINGS,
    cond_limit: float = COND_LIMIT,
) -> tuple[DemixingSet, ConvergenceReport]:
    """Solve the extended SeDJoCo equations F(B) = O by damped Newton iterations.

    The full step vec(B) <- vec(B) - H^-1 vec(F) is halved while the residual norm
    does not decrease, at most max_halvings times per iteration.

    Returns:
        The solution and its convergence report.

    Raises:
        SingularJacobianError: Jacobian condition estimate above cond_limit.
        NoConvergenceError: residual still above tol after max_iter iterations,
            or no decreasing step found; carries the report.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")

    M, K = B0.M, B0.K
    report = ConvergenceReport(tol=tol, max_iter=max_iter)
    B = B0
    F = residual(B, Q)
    report.residual_history.append(F.max_abs())
    report.iterates.append(B.vec())

    while F.max_abs() > tol:
        if report.iterations >= max_iter:
            raise NoConvergenceError(
                f"no convergence after {max_iter} iterations (residual {F.max_abs():.3e})", report
            )
        step = jacobian(B, Q).solve(F.vec(), cond_limit)
        current = B.vec()
        norm = F.norm()
        scale = 1.0
        for halving in range(max_halvings + 1):
            candidate = DemixingSet.from_vec(current - scale * step, M, K)
            F_candidate = residual(candidate, Q)
            if F_candidate.norm() < norm:
                break
            scale *= 0.5
        else:
            raise NoConvergenceError(
                f"line search failed at iteration {report.iterations + 1} "
                f"(residual {F.max_abs():.3e})",
                report,
            )
        B, F = candidate, F_candidate
        report.iterations += 1
        report.halvings.append(halving)
        report.residual_history.append(F.max_abs())
        report.iterates.append(B.vec())
        logger.debug(
            f"Newton iteration {report.iterations}: residual={F.max_abs():.3e}, halvings={halving}"
        )

    report.converged = True
    return B, report


__all__ = ["ConvergenceReport", "newton_solve", "MAX_HALVINGS"]
