"""Large-sample limits of the target matrices at identity mixing.

With A = I the targets converge to diagonal matrices whose entries are the
normalized traces phi_{k,l}^(m1,m2) = (1/T) Tr(P_k^(m1,m2) C_l^(m2,m1)). The
diagonal scale equations sum_l g_k^(m) phi_{k,k}^(m,l) g_k^(l) = 1 then fix the
asymptotic solution, which is the identity whenever the presumed model matches.
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.core.errors import NoConvergenceError
from src.core.model import DemixingSet, ProblemDims, TargetSet
from src.perturbation.traces import TraceEngine

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhiLimits:
    """values[k, l, m1, m2] = (1/T) Tr(P_k^(m1,m2) C_l^(m2,m1))."""

    values: np.ndarray

    def matrix(self, k: int, m1: int, m2: int) -> np.ndarray:
        """The diagonal matrix Phi_k^(m1,m2) with entries over l."""
        return np.diag(self.values[k, :, m1, m2])

    def scale_block(self, k: int) -> np.ndarray:
        """M x M matrix phi_{k,k}^(m,l) driving the scale equations of source k."""
        return self.values[k, k]


def expected_targets(engine: TraceEngine, dims: ProblemDims) -> TargetSet:
    """Diagonal limit targets with Q_{k,ii}^(m1,m2) = (1/T) Tr(C_i^(m2,m1) P_k^(m1,m2))."""
    M, K = dims.M, dims.K
    Q = np.zeros((K, M, M, K, K))
    for k in range(K):
        for m1 in range(M):
            for m2 in range(M):
                for i in range(K):
                    Q[k, m1, m2, i, i] = engine.pair_trace(i, k, m1, m2)
    # exact symmetry between (m1, m2) and (m2, m1)
    Q = 0.5 * (Q + Q.transpose(0, 2, 1, 4, 3))
    return TargetSet(Q)


def phi_limits(engine: TraceEngine) -> PhiLimits:
    M, K = engine.M, engine.K
    values = np.zeros((K, K, M, M))
    for k in range(K):
        for ell in range(K):
            for m1 in range(M):
                for m2 in range(M):
                    values[k, ell, m1, m2] = engine.pair_trace(ell, k, m1, m2)
    return PhiLimits(values)


CONTINUATION_STEPS = 16


def _newton_scale(phi: np.ndarray, g: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    for _ in range(max_iter):
        F = g * (phi @ g) - 1.0
        if np.max(np.abs(F)) <= tol:
            return g
        J = np.diag(phi @ g) + g[:, None] * phi
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError as e:
            raise NoConvergenceError(f"scale equations have a singular Jacobian: {e}") from e
        scale = 1.0
        norm = np.linalg.norm(F)
        for _ in range(30):
            candidate = g - scale * step
            if np.linalg.norm(candidate * (phi @ candidate) - 1.0) < norm:
                break
            scale *= 0.5
        else:
            raise NoConvergenceError(f"scale equations: no decreasing step (residual {norm:.3e})")
        g = candidate
    F = g * (phi @ g) - 1.0
    if np.max(np.abs(F)) <= tol:
        return g
    raise NoConvergenceError(f"scale equations did not converge (residual {np.max(np.abs(F)):.3e})")


def _solve_scale_block(phi: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    """Positive root of g * (phi @ g) = 1.

    Newton starts at g = 1, which is the root for a matched model. If that lands on
    a root with a non-positive gain, the root is tracked along phi_t = (1 - t) I + t phi
    from t = 0, where g = 1 is exact.
    """
    M = phi.shape[0]
    try:
        g = _newton_scale(phi, np.ones(M), tol, max_iter)
        if np.all(g > 0):
            return g
        logger.debug(f"scale equations reached a non-positive root {g}, continuing from g = 1")
    except NoConvergenceError as e:
        logger.debug(f"direct scale solve failed ({e}), continuing from g = 1")
    g = np.ones(M)
    for t in np.linspace(0.0, 1.0, CONTINUATION_STEPS + 1)[1:]:
        g = _newton_scale((1.0 - t) * np.eye(M) + t * phi, g, tol, max_iter)
    if not np.all(g > 0):
        raise NoConvergenceError(f"scale equations: no positive root found ({g})")
    return g


def asymptotic_gains(
    phi: PhiLimits, dims: ProblemDims, tol: float = 1e-12, max_iter: int = 100
) -> np.ndarray:
    """Diagonal gains G_o,kk^(m) as an (M, K) array.

    Raises:
        NoConvergenceError: the scale equations of some source have no reachable root.
    """
    gains = np.empty((dims.M, dims.K))
    for k in range(dims.K):
        gains[:, k] = _solve_scale_block(phi.scale_block(k), tol, max_iter)
    return gains


def scale_residual(phi: PhiLimits, gains: np.ndarray) -> float:
    worst = 0.0
    for k in range(gains.shape[1]):
        g = gains[:, k]
        worst = max(worst, float(np.max(np.abs(g * (phi.scale_block(k) @ g) - 1.0))))
    return worst


def operating_point(gains: np.ndarray) -> DemixingSet:
    return DemixingSet(np.stack([np.diag(g) for g in gains]))


__all__ = [
    "PhiLimits",
    "expected_targets",
    "phi_limits",
    "asymptotic_gains",
    "scale_residual",
    "operating_point",
]
