"""SCV covariance and precision matrices built from FIR source models.

Two orderings of the MT samples of one source component vector appear here:

- block-major (m*T + t), used by the dense matrices and T x T blocks;
- time-interleaved (t*M + m), used by the banded factorization, where the
  covariance has half-bandwidth M*L - 1.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import (
    LinAlgError,
    cho_factor,
    cho_solve,
    cho_solve_banded,
    cholesky_banded,
    toeplitz,
)

from src.core.errors import SingularCovarianceError
from src.covariance.fir import FirBank

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScvCovariance:
    """Stationary block-Toeplitz covariance of one source component vector.

    Args:
        lags: (M, M, 2L-1) generator, lags[m1, m2, tau + L - 1] = r^(m1,m2)[tau].
        T: number of samples.
    """

    lags: np.ndarray
    T: int

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=float)
        if lags.ndim != 3 or lags.shape[0] != lags.shape[1] or lags.shape[2] % 2 != 1:
            raise ValueError(f"lags must have shape (M, M, 2L-1), got {lags.shape}")
        if self.T < 1:
            raise ValueError("T must be positive")
        object.__setattr__(self, "lags", lags)

    @property
    def M(self) -> int:
        return self.lags.shape[0]

    @property
    def L(self) -> int:
        return (self.lags.shape[2] + 1) // 2

    def lag(self, m1: int, m2: int, tau: int) -> float:
        if abs(tau) >= self.L:
            return 0.0
        return float(self.lags[m1, m2, tau + self.L - 1])

    def source_powers(self) -> np.ndarray:
        return np.diagonal(self.lags[:, :, self.L - 1]).copy()

    def with_T(self, T: int) -> "ScvCovariance":
        return ScvCovariance(self.lags, T)

    def block(self, m1: int, m2: int) -> np.ndarray:
        """T x T Toeplitz block with entry [t1, t2] = r^(m1,m2)[t1 - t2]."""
        L, T = self.L, self.T
        n = min(L, T)
        col = np.zeros(T)
        row = np.zeros(T)
        offsets = np.arange(n)
        col[:n] = self.lags[m1, m2, L - 1 + offsets]
        row[:n] = self.lags[m1, m2, L - 1 - offsets]
        return toeplitz(col, row)

    def dense(self) -> np.ndarray:
        M, T = self.M, self.T
        out = np.empty((M * T, M * T))
        for m1 in range(M):
            for m2 in range(M):
                out[m1 * T : (m1 + 1) * T, m2 * T : (m2 + 1) * T] = self.block(m1, m2)
        return out

    def bandwidth(self) -> int:
        return min(self.M * self.L - 1, self.M * self.T - 1)

    def banded_upper(self) -> np.ndarray:
        """Upper banded storage of the time-interleaved covariance, as cholesky_banded expects."""
        M, L = self.M, self.L
        n = M * self.T
        u = self.bandwidth()
        ab = np.zeros((u + 1, n))
        for d in range(u + 1):
            j = np.arange(d, n)
            i = j - d
            ti, mi = np.divmod(i, M)
            tj, mj = np.divmod(j, M)
            lag = ti - tj
            valid = lag > -L
            ab[u - d, j[valid]] = self.lags[mi[valid], mj[valid], lag[valid] + L - 1]
        return ab

    def symbol(self, n_freq: int) -> np.ndarray:
        """Matrix symbol S(w_n) = sum_tau r[tau] exp(-i w_n tau) on n_freq grid points.

        Returns an (n_freq, M, M) complex array, Hermitian at every frequency.
        """
        L = self.L
        if n_freq < 2 * L - 1:
            raise ValueError(f"n_freq must be at least {2 * L - 1}")
        circ = np.zeros((self.M, self.M, n_freq))
        for tau in range(-(L - 1), L):
            circ[:, :, tau % n_freq] = self.lags[:, :, tau + L - 1]
        return np.fft.fft(circ, axis=-1).transpose(2, 0, 1)


@dataclass(frozen=True)
class ScvPrecision:
    """Dense precision blocks P^(m1,m2) stored as an (M, M, T, T) array."""

    blocks: np.ndarray

    @property
    def M(self) -> int:
        return self.blocks.shape[0]

    @property
    def T(self) -> int:
        return self.blocks.shape[2]

    def block(self, m1: int, m2: int) -> np.ndarray:
        return self.blocks[m1, m2]

    def dense(self) -> np.ndarray:
        M, T = self.M, self.T
        return self.blocks.transpose(0, 2, 1, 3).reshape(M * T, M * T)

    def target_blocks(self, X: np.ndarray) -> np.ndarray:
        """(1/T) X^(m1) P^(m1,m2) X^(m2)T for all dataset pairs, shape (M, M, K, K)."""
        T = X.shape[-1]
        return np.einsum("mat,mnts,nbs->mnab", X, self.blocks, X, optimize=True) / T


class BandedPrecision:
    """Applies the inverse of a block-Toeplitz covariance via banded Cholesky.

    Equivalent to the dense ScvPrecision of the same covariance, at O(MT (ML)^2) cost.
    """

    def __init__(self, cov: ScvCovariance):
        self.M = cov.M
        self.T = cov.T
        try:
            self._factor = cholesky_banded(cov.banded_upper(), lower=False)
        except LinAlgError as e:
            raise SingularCovarianceError(f"banded Cholesky failed: {e}") from e

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve C y = rhs for time-interleaved right-hand sides."""
        return cho_solve_banded((self._factor, False), rhs)

    def target_blocks(self, X: np.ndarray) -> np.ndarray:
        M, K, T = X.shape
        if M != self.M or T != self.T:
            raise ValueError(f"data shape {X.shape} does not match precision (M={self.M}, T={self.T})")
        # column (m2, b) carries row b of X^(m2) placed on the m2 slots
        rhs = np.zeros((T, M, M, K))
        for m in range(M):
            rhs[:, m, m, :] = X[m].T
        solved = self.solve(rhs.reshape(T * M, M * K)).reshape(T, M, M, K)
        return np.einsum("mat,tmnb->mnab", X, solved, optimize=True) / T


def scv_covariance_from_firs(bank: FirBank, k: int, T: int) -> ScvCovariance:
    if not bank.is_normalized():
        raise ValueError("FIR bank is not energy-normalized; call normalize() first")
    if not 0 <= k < bank.K:
        raise ValueError(f"source index {k} out of range for K={bank.K}")
    return ScvCovariance(bank.lag_generators(k), T)


def precision_from_dense(matrix: np.ndarray, M: int, T: int) -> ScvPrecision:
    """Block partition of the inverse of a symmetric positive definite block-major matrix."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (M * T, M * T):
        raise ValueError(f"expected shape {(M * T, M * T)}, got {matrix.shape}")
    try:
        factor = cho_factor(matrix, lower=True)
    except LinAlgError as e:
        raise SingularCovarianceError(f"covariance is not positive definite: {e}") from e
    inverse = cho_solve(factor, np.eye(M * T))
    inverse = 0.5 * (inverse + inverse.T)
    return ScvPrecision(inverse.reshape(M, T, M, T).transpose(0, 2, 1, 3).copy())


def scv_precision(cov: ScvCovariance) -> ScvPrecision:
    logger.debug(f"Dense precision for M={cov.M}, T={cov.T}")
    return precision_from_dense(cov.dense(), cov.M, cov.T)


def mixture_covariance(cov_a: ScvCovariance, cov_b: ScvCovariance, p: float) -> ScvCovariance:
    """Second-order statistics of a per-sample Bernoulli(p) switch between two processes.

    The switch is shared only within one dataset at one time instant, so equal-time
    entries of the diagonal blocks mix linearly in p and all other entries quadratically.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"switch probability must lie in (0, 1), got {p}")
    if cov_a.lags.shape != cov_b.lags.shape or cov_a.T != cov_b.T:
        raise ValueError("mixture components must share dimensions")
    lags = p**2 * cov_a.lags + (1.0 - p) ** 2 * cov_b.lags
    centre = cov_a.L - 1
    for m in range(cov_a.M):
        lags[m, m, centre] = p * cov_a.lags[m, m, centre] + (1.0 - p) * cov_b.lags[m, m, centre]
    return ScvCovariance(lags, cov_a.T)


__all__ = [
    "ScvCovariance",
    "ScvPrecision",
    "BandedPrecision",
    "scv_covariance_from_firs",
    "scv_precision",
    "precision_from_dense",
    "mixture_covariance",
]
