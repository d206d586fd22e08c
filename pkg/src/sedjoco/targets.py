from collections.abc import Sequence
from typing import Protocol

import numpy as np

from src.core.model import TargetSet


class PrecisionOperator(Protocol):
    """Anything that can form (1/T) X^(m1) P^(m1,m2) X^(m2)T for all dataset pairs."""

    def target_blocks(self, X: np.ndarray) -> np.ndarray: ...


def symmetrize_pairs(blocks: np.ndarray) -> np.ndarray:
    """Enforce Q^(m2,m1) = Q^(m1,m2)T exactly on an (M, M, K, K) block grid."""
    out = np.array(blocks, dtype=float, copy=True)
    M = out.shape[0]
    for m2 in range(M):
        out[m2, m2] = 0.5 * (out[m2, m2] + out[m2, m2].T)
        for m1 in range(m2):
            out[m2, m1] = out[m1, m2].T
    return out


def compute_targets(X: np.ndarray, precisions: Sequence[PrecisionOperator]) -> TargetSet:
    """Target matrices from data X of shape (M, K, T) and one presumed precision per source.

    Raises:
        ValueError: if the data and the number of precision operators disagree.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 3:
        raise ValueError(f"X must have shape (M, K, T), got {X.shape}")
    K = X.shape[1]
    if len(precisions) != K:
        raise ValueError(f"expected {K} precision operators, got {len(precisions)}")
    Q = np.stack([symmetrize_pairs(P.target_blocks(X)) for P in precisions])
    return TargetSet(Q)


__all__ = ["PrecisionOperator", "symmetrize_pairs", "compute_targets"]
