import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from src.core.model import DemixingSet, ProblemDims, TargetSet
from src.covariance.scv import ScvCovariance
from src.perturbation.asymptotics import (
    PhiLimits,
    asymptotic_gains,
    expected_targets,
    operating_point,
    phi_limits,
)
from src.perturbation.gradients import GradientMatrix, solve_gradients
from src.perturbation.qcov import QCovariance, q_covariance_identity
from src.perturbation.traces import TraceEngine, make_trace_engine
from src.sedjoco.equations import jacobian

logger = logging.getLogger(__name__)


def to_db(value: float) -> float:
    if value <= 0.0:
        return float("-inf")
    return float(10.0 * np.log10(value))


@dataclass(frozen=True)
class IsrTable:
    """ISR^(m)_ij as an (M, K, K) array of power ratios; the diagonal is unused."""

    values: np.ndarray
    trials: int = 0
    excluded: int = 0

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def K(self) -> int:
        return self.values.shape[1]

    def off_diagonal(self) -> np.ndarray:
        mask = ~np.eye(self.K, dtype=bool)
        return self.values[:, mask]

    @property
    def total_normalized(self) -> float:
        if self.K < 2:
            return 0.0
        return float(np.mean(self.off_diagonal()))

    @property
    def total_db(self) -> float:
        return to_db(self.total_normalized)

    def entries(self) -> list[tuple[int, int, int, float]]:
        """(m, i, j, value) for every off-diagonal cell, 0-based, in canonical order."""
        return [
            (m, i, j, float(self.values[m, i, j]))
            for m in range(self.M)
            for i in range(self.K)
            for j in range(self.K)
            if i != j
        ]


def predicted_isr(
    G: GradientMatrix,
    C_q: QCovariance,
    dims: ProblemDims,
    source_powers: np.ndarray,
    operating: DemixingSet | None = None,
) -> IsrTable:
    """ISR_ij^(m) = g_ij^(m)T C_q g_ij^(m) * power_j / power_i / (B_o,ii^(m))^2.

    Args:
        source_powers: (M, K) powers of the sources.
        operating: linearization point; the identity when omitted.
    """
    M, K = dims.M, dims.K
    if G.G.shape[1] != C_q.C.shape[0]:
        raise ValueError("gradient columns and target covariance disagree in size")
    diag = np.ones((M, K)) if operating is None else np.diagonal(operating.B, axis1=1, axis2=2)
    values = np.zeros((M, K, K))
    for m in range(M):
        for i in range(K):
            for j in range(K):
                if i == j:
                    continue
                g = G.row(m, i, j)
                ratio = source_powers[m, j] / source_powers[m, i]
                values[m, i, j] = float(g @ C_q.C @ g) * ratio / diag[m, i] ** 2
    return IsrTable(values)


@dataclass(frozen=True)
class Prediction:
    isr: IsrTable
    targets: TargetSet
    phi: PhiLimits
    gains: np.ndarray
    gradient: GradientMatrix
    qcov: QCovariance


def predict_pipeline(engine: TraceEngine, dims: ProblemDims) -> Prediction:
    """Expected targets -> asymptotic solution -> gradients -> target covariance -> ISR."""
    targets = expected_targets(engine, dims)
    phi = phi_limits(engine)
    gains = asymptotic_gains(phi, dims)
    B_o = operating_point(gains)
    G = solve_gradients(jacobian(B_o, targets), dims, B_o)
    C_q = q_covariance_identity(engine, dims)
    isr = predicted_isr(G, C_q, dims, engine.source_powers(), B_o)
    logger.debug(f"Predicted total ISR {isr.total_db:.3f} dB at T={dims.T}")
    return Prediction(isr=isr, targets=targets, phi=phi, gains=gains, gradient=G, qcov=C_q)


def icrlb_gaussian(
    true_covs: Sequence[ScvCovariance], T: int, dims: ProblemDims, **engine_options
) -> IsrTable:
    """Matched-model prediction, which is the induced bound for these covariances."""
    covs = [cov.with_T(T) for cov in true_covs]
    engine = make_trace_engine(covs, covs, **engine_options)
    return predict_pipeline(engine, dims.with_T(T)).isr


__all__ = ["IsrTable", "Prediction", "to_db", "predicted_isr", "predict_pipeline", "icrlb_gaussian"]
