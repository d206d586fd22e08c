import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from src.core.indexing import FlatIndexMaps, QIndex
from src.core.model import ProblemDims
from src.perturbation.traces import TraceEngine

logger = logging.getLogger(__name__)

FourthOrderCorrection = Callable[[QIndex, QIndex], float]


@dataclass(frozen=True)
class QCovariance:
    """Covariance of the canonical target vector at identity mixing."""

    C: np.ndarray
    dims: ProblemDims

    def entry(self, r1: QIndex, r2: QIndex) -> float:
        maps = FlatIndexMaps.build(self.dims.M, self.dims.K)
        return float(self.C[maps.positions[r1], maps.positions[r2]])


def q_covariance_identity(
    engine: TraceEngine,
    dims: ProblemDims,
    fourth_order_correction: FourthOrderCorrection | None = None,
) -> QCovariance:
    """Gaussian covariance of the target elements Q_{k,ij}^(m,n).

    For elements r1 = (k1, i1, j1, m1, n1) and r2 = (k2, i2, j2, m2, n2):

        T^2 cov = [i1=i2, j1=j2] Tr(C_i1^(m2,m1) P_k1^(m1,n1) C_j1^(n1,n2) P_k2^(n2,m2))
                + [i1=j2, j1=i2] Tr(C_i1^(n2,m1) P_k1^(m1,n1) C_i2^(n1,m2) P_k2^(m2,n2))

    so both terms come from the same trace tensor of (i1, k1, j1, k2). Entries whose
    source indices do not pair up are exactly zero.

    Args:
        engine: trace engine holding the true covariances and presumed precisions.
        dims: problem dimensions (T taken from the engine).
        fourth_order_correction: optional additive term on entries with
            i1 = j1 = i2 = j2 (non-Gaussian cumulant slot).
    """
    M, K = dims.M, dims.K
    maps = FlatIndexMaps.build(M, K)
    idx = maps.arrays()
    n_q = maps.n_q
    C = np.zeros((n_q, n_q))

    groups: dict[tuple[int, int, int], np.ndarray] = {}
    for k in range(K):
        for i in range(K):
            for j in range(K):
                groups[(k, i, j)] = np.flatnonzero((idx["k"] == k) & (idx["i"] == i) & (idx["j"] == j))

    for i1 in range(K):
        for j1 in range(K):
            for k1 in range(K):
                r1 = groups[(k1, i1, j1)]
                if r1.size == 0:
                    continue
                m1 = idx["m1"][r1][:, None]
                n1 = idx["m2"][r1][:, None]
                for k2 in range(K):
                    tensor = engine.trace4_tensor(i1, k1, j1, k2)
                    same = groups[(k2, i1, j1)]
                    if same.size:
                        m2 = idx["m1"][same][None, :]
                        n2 = idx["m2"][same][None, :]
                        C[np.ix_(r1, same)] += tensor[m2, m1, n1, n2]
                    swapped = groups[(k2, j1, i1)]
                    if swapped.size:
                        m2 = idx["m1"][swapped][None, :]
                        n2 = idx["m2"][swapped][None, :]
                        C[np.ix_(r1, swapped)] += tensor[n2, m1, n1, m2]
    engine.clear_cache()

    C = 0.5 * (C + C.T) / engine.T

    if fourth_order_correction is not None:
        diagonal = [n for n, e in enumerate(maps.entries) if e.i == e.j]
        for a in diagonal:
            for b in diagonal:
                ea, eb = maps.entries[a], maps.entries[b]
                if ea.i == eb.i:
                    C[a, b] += fourth_order_correction(ea, eb)

    logger.debug(f"Target covariance assembled: {n_q}x{n_q}, T={engine.T}")
    return QCovariance(C, dims)


__all__ = ["QCovariance", "FourthOrderCorrection", "q_covariance_identity"]
