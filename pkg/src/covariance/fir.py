from dataclasses import dataclass

import numpy as np

ENERGY_TOL = 1e-12


def fir_cross_correlation(h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
    """Deterministic cross-correlation r[tau] = sum_u h1[u] h2[u - tau].

    Returns the 2L-1 lags tau = -(L-1)..(L-1); lag tau lives at position tau + L - 1.
    """
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    if h1.shape != h2.shape or h1.ndim != 1:
        raise ValueError(f"tap vectors must have equal 1-d shape, got {h1.shape} and {h2.shape}")
    return np.convolve(h1, h2[::-1])


@dataclass(frozen=True)
class FirBank:
    """FIR filters h_k^(m,l) from driving noise l to dataset m for source k.

    Args:
        taps: array of shape (K, M, M, L); taps[k, m, l] is h_k^(m,l).
        eta: cross-filter energy used by normalize().
    """

    taps: np.ndarray
    eta: float = 1.0

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        if taps.ndim != 4 or taps.shape[1] != taps.shape[2]:
            raise ValueError(f"taps must have shape (K, M, M, L), got {taps.shape}")
        if not 0.0 <= self.eta:
            raise ValueError("eta must be non-negative")
        object.__setattr__(self, "taps", taps)

    @property
    def K(self) -> int:
        return self.taps.shape[0]

    @property
    def M(self) -> int:
        return self.taps.shape[1]

    @property
    def L(self) -> int:
        return self.taps.shape[3]

    def target_energies(self) -> np.ndarray:
        """(M, M) grid of required energies: 1 on the diagonal, eta elsewhere."""
        M = self.M
        return np.where(np.eye(M, dtype=bool), 1.0, self.eta)

    def energies(self) -> np.ndarray:
        return np.sum(self.taps**2, axis=-1)

    def normalize(self) -> "FirBank":
        energies = self.energies()
        target = np.broadcast_to(self.target_energies(), energies.shape)
        if np.any((energies == 0.0) & (target > 0.0)):
            raise ValueError("cannot normalize an all-zero filter to positive energy")
        scale = np.sqrt(np.divide(target, energies, out=np.zeros_like(energies), where=energies > 0))
        return FirBank(self.taps * scale[..., None], eta=self.eta)

    def is_normalized(self, tol: float = ENERGY_TOL) -> bool:
        target = np.broadcast_to(self.target_energies(), (self.K, self.M, self.M))
        return bool(np.max(np.abs(self.energies() - target)) <= tol)

    def lag_generators(self, k: int) -> np.ndarray:
        """r_k^(m1,m2)[tau] for source k as an (M, M, 2L-1) array."""
        M, L = self.M, self.L
        r = np.zeros((M, M, 2 * L - 1))
        for m1 in range(M):
            for m2 in range(M):
                for ell in range(M):
                    r[m1, m2] += fir_cross_correlation(self.taps[k, m1, ell], self.taps[k, m2, ell])
        return r

    def source_power(self) -> float:
        return 1.0 + (self.M - 1) * self.eta


__all__ = ["FirBank", "fir_cross_correlation"]
