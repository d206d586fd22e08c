import logging
from collections.abc import Sequence

import numpy as np

from src.core.model import DemixingSet
from src.perturbation.isr import IsrTable

logger = logging.getLogger(__name__)


def align_permutation(T: np.ndarray) -> np.ndarray:
    """Greedily reorder and re-sign rows of a K x K global matrix onto the diagonal."""
    K = T.shape[0]
    out = np.zeros_like(T)
    power = np.abs(T) ** 2
    power = power / power.sum(axis=1, keepdims=True)
    free_rows, free_cols = set(range(K)), set(range(K))
    for _ in range(K):
        row, col = max(
            ((r, c) for r in free_rows for c in free_cols), key=lambda rc: power[rc[0], rc[1]]
        )
        out[col] = T[row] * np.sign(T[row, col])
        free_rows.discard(row)
        free_cols.discard(col)
    return out


def empirical_isr(
    trial_outputs: Sequence[DemixingSet | None],
    A: np.ndarray,
    source_powers: np.ndarray,
    resolve_permutation: bool = False,
) -> IsrTable:
    """Mean of |T_ij|^2 / |T_ii|^2 * power_j / power_i over trials, T = B_hat A.

    Trials given as None did not converge; they are excluded and counted.
    """
    A = np.asarray(A, dtype=float)
    M, K, _ = A.shape
    converged = [B for B in trial_outputs if B is not None]
    excluded = len(trial_outputs) - len(converged)
    if excluded:
        logger.warning(f"{excluded} of {len(trial_outputs)} trials excluded (no convergence)")
    if not converged:
        return IsrTable(np.full((M, K, K), np.nan), trials=0, excluded=excluded)

    ratios = np.zeros((M, K, K))
    power_ratio = source_powers[:, None, :] / source_powers[:, :, None]
    for B in converged:
        T = B.global_matrices(A)
        if resolve_permutation:
            T = np.stack([align_permutation(block) for block in T])
        diag = np.diagonal(T, axis1=1, axis2=2)
        ratios += T**2 / diag[:, :, None] ** 2
    values = ratios / len(converged) * power_ratio
    values[:, np.arange(K), np.arange(K)] = 0.0
    return IsrTable(values, trials=len(converged), excluded=excluded)


__all__ = ["align_permutation", "empirical_isr"]
