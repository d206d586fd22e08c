"""Normalized trace engines for second-order statistics of target matrices.

Both engines expose
    pair_trace(i, k, a, b)        = (1/T) Tr(C_i^(b,a) P_k^(a,b))
    trace4_tensor(i, k1, j, k2)   -> X[a, b, c, d] = (1/T) Tr(C_i^(a,b) P_k1^(b,c) C_j^(c,d) P_k2^(d,a))
where C are the true covariance blocks and P the presumed precision blocks.

ExactTraceEngine works on dense T x T blocks. SpectralTraceEngine replaces every
block-Toeplitz matrix by its matrix symbol on a frequency grid, which gives the
large-T limit of the same traces.
"""

import logging
from collections.abc import Sequence
from typing import Protocol

import numpy as np

from src.covariance.scv import ScvCovariance, ScvPrecision, scv_precision

logger = logging.getLogger(__name__)

TRACE_METHODS = ("auto", "exact", "spectral")


class TraceEngine(Protocol):
    M: int
    K: int
    T: int

    def pair_trace(self, i: int, k: int, a: int, b: int) -> float: ...
    def trace4_tensor(self, i: int, k1: int, j: int, k2: int) -> np.ndarray: ...
    def source_powers(self) -> np.ndarray: ...
    def clear_cache(self) -> None: ...


def _powers(true_covs: Sequence[ScvCovariance]) -> np.ndarray:
    return np.stack([cov.source_powers() for cov in true_covs], axis=1)


def toeplitz_times(lags: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Product of the Toeplitz matrix generated by lags (length 2L-1) with P."""
    L = (lags.shape[0] + 1) // 2
    T = P.shape[0]
    out = np.zeros_like(P)
    for tau in range(-(L - 1), L):
        coef = lags[tau + L - 1]
        if coef == 0.0 or abs(tau) >= T:
            continue
        if tau >= 0:
            out[tau:] += coef * P[: T - tau]
        else:
            out[: T + tau] += coef * P[-tau:]
    return out


class ExactTraceEngine:
    def __init__(self, true_covs: Sequence[ScvCovariance], precisions: Sequence[ScvPrecision]):
        if len(true_covs) != len(precisions):
            raise ValueError("need one presumed precision per true covariance")
        self.K = len(true_covs)
        self.M = true_covs[0].M
        self.T = true_covs[0].T
        for cov, prec in zip(true_covs, precisions, strict=True):
            if cov.T != self.T or prec.T != self.T or cov.M != self.M or prec.M != self.M:
                raise ValueError("true and presumed statistics must share (M, T)")
        self._covs = list(true_covs)
        self._precisions = list(precisions)
        self._products: dict[tuple[int, int, int, int, int], np.ndarray] = {}

    @classmethod
    def from_covariances(
        cls, true_covs: Sequence[ScvCovariance], presumed_covs: Sequence[ScvCovariance]
    ) -> "ExactTraceEngine":
        return cls(true_covs, [scv_precision(cov) for cov in presumed_covs])

    def source_powers(self) -> np.ndarray:
        return _powers(self._covs)

    def pair_trace(self, i: int, k: int, a: int, b: int) -> float:
        # Tr(C P) = sum_tau r[tau] * sum of the tau-th superdiagonal of P
        cov = self._covs[i]
        P = self._precisions[k].block(a, b)
        L = cov.L
        total = 0.0
        for tau in range(-(L - 1), L):
            if abs(tau) < self.T:
                total += cov.lags[b, a, tau + L - 1] * np.trace(P, offset=tau)
        return total / self.T

    def _product(self, i: int, a: int, b: int, k: int, c: int) -> np.ndarray:
        key = (i, a, b, k, c)
        if key not in self._products:
            self._products[key] = toeplitz_times(
                self._covs[i].lags[a, b], self._precisions[k].block(b, c)
            )
        return self._products[key]

    def trace4_tensor(self, i: int, k1: int, j: int, k2: int) -> np.ndarray:
        M = self.M
        out = np.empty((M, M, M, M))
        for a in range(M):
            for b in range(M):
                for c in range(M):
                    U = self._product(i, a, b, k1, c)
                    for d in range(M):
                        V = self._product(j, c, d, k2, a)
                        out[a, b, c, d] = np.sum(U * V.T)
        return out / self.T

    def cache_size(self) -> int:
        return len(self._products)

    def clear_cache(self) -> None:
        self._products.clear()


class SpectralTraceEngine:
    def __init__(
        self,
        true_covs: Sequence[ScvCovariance],
        presumed_covs: Sequence[ScvCovariance],
        T: int,
        n_freq: int = 4096,
    ):
        if len(true_covs) != len(presumed_covs):
            raise ValueError("need one presumed covariance per true covariance")
        self.K = len(true_covs)
        self.M = true_covs[0].M
        self.T = T
        self.n_freq = n_freq
        self._covs = list(true_covs)
        self._symbols = [cov.symbol(n_freq) for cov in true_covs]
        self._inverse_symbols = [np.linalg.inv(cov.symbol(n_freq)) for cov in presumed_covs]

    def source_powers(self) -> np.ndarray:
        return _powers(self._covs)

    def pair_trace(self, i: int, k: int, a: int, b: int) -> float:
        values = self._symbols[i][:, b, a] * self._inverse_symbols[k][:, a, b]
        return float(np.mean(values).real)

    def trace4_tensor(self, i: int, k1: int, j: int, k2: int) -> np.ndarray:
        U = self._symbols[i][:, :, :, None] * self._inverse_symbols[k1][:, None, :, :]
        V = self._symbols[j][:, :, :, None] * self._inverse_symbols[k2][:, None, :, :]
        return np.einsum("nabc,ncda->abcd", U, V, optimize=True).real / self.n_freq

    def clear_cache(self) -> None:
        pass


def exact_cache_bytes(M: int, K: int, T: int) -> int:
    return 8 * K * K * M**3 * T * T


def make_trace_engine(
    true_covs: Sequence[ScvCovariance],
    presumed_covs: Sequence[ScvCovariance],
    method: str = "auto",
    exact_limit: int = 2048,
    cache_mb: float = 1024.0,
    n_freq: int = 4096,
) -> ExactTraceEngine | SpectralTraceEngine:
    """Pick the exact engine at small scale and the spectral one otherwise.

    Raises:
        ValueError: unknown method.
    """
    if method not in TRACE_METHODS:
        raise ValueError(f"trace method must be one of {TRACE_METHODS}, got {method!r}")
    M, K, T = true_covs[0].M, len(true_covs), true_covs[0].T
    cache_fits = exact_cache_bytes(M, K, T) <= cache_mb * 2**20
    if method == "auto":
        method = "exact" if M * T <= exact_limit and cache_fits else "spectral"
    elif method == "exact" and not cache_fits:
        logger.warning(
            f"Exact traces need {exact_cache_bytes(M, K, T) / 2**20:.0f} MB (budget {cache_mb:g} MB); "
            "using the spectral engine"
        )
        method = "spectral"
    logger.debug(f"Trace engine: {method} (M={M}, K={K}, T={T})")
    if method == "exact":
        return ExactTraceEngine.from_covariances(true_covs, presumed_covs)
    return SpectralTraceEngine(true_covs, presumed_covs, T, n_freq=n_freq)


__all__ = [
    "TRACE_METHODS",
    "TraceEngine",
    "ExactTraceEngine",
    "SpectralTraceEngine",
    "make_trace_engine",
    "toeplitz_times",
    "exact_cache_bytes",
]
