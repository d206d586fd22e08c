"""Minimum-phase FIR design from randomly drawn zeros.

A filter of length L has L - 1 zeros: (L - 1) // 2 conjugate pairs, stored by
their upper member, plus one real zero when L is even.
"""

from dataclasses import dataclass

import numpy as np

from src.covariance.fir import FirBank


def zero_counts(L: int) -> tuple[int, int]:
    """(number of real zeros, number of conjugate pairs) for filter length L."""
    if L < 1:
        raise ValueError("filter length must be positive")
    n_pairs = (L - 1) // 2
    return (L - 1) - 2 * n_pairs, n_pairs


@dataclass(frozen=True)
class ZeroSet:
    """Zeros of a batch of real FIR filters.

    Args:
        real: (..., n_real) real zeros.
        pairs: (..., n_pairs) complex zeros, conjugates implied.
    """

    real: np.ndarray
    pairs: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.real.shape[:-1]

    @property
    def L(self) -> int:
        return 1 + self.real.shape[-1] + 2 * self.pairs.shape[-1]

    def all_zeros(self) -> np.ndarray:
        return np.concatenate([self.real.astype(complex), self.pairs, np.conj(self.pairs)], axis=-1)

    def radii(self) -> np.ndarray:
        return np.abs(self.all_zeros())

    def max_radius(self) -> float:
        radii = self.radii()
        return float(radii.max()) if radii.size else 0.0


def draw_zeros(a: float, L: int, rng: np.random.Generator, shape: tuple[int, ...] = ()) -> ZeroSet:
    """Radii exp(-a u) with u ~ U(0, 1); pair phases ~ U(0, pi); real zeros at phase 0."""
    if a <= 0:
        raise ValueError("a must be positive")
    n_real, n_pairs = zero_counts(L)
    real = np.exp(-a * rng.uniform(0.0, 1.0, size=(*shape, n_real)))
    radius = np.exp(-a * rng.uniform(0.0, 1.0, size=(*shape, n_pairs)))
    phase = rng.uniform(0.0, np.pi, size=(*shape, n_pairs))
    return ZeroSet(real=real, pairs=radius * np.exp(1j * phase))


def perturb_zeros(z0: ZeroSet, b: float, c: float, rng: np.random.Generator) -> ZeroSet:
    """Pair phases get N(0, b^2) noise, all radii are scaled by (1 - c).

    The upper member of each pair is perturbed and its conjugate mirrors it; real
    zeros keep phase zero.
    """
    if b < 0:
        raise ValueError("phase noise b must be non-negative")
    if not 0.0 <= c < 1.0:
        raise ValueError("attenuation c must lie in [0, 1)")
    noise = rng.normal(0.0, b, size=z0.pairs.shape) if b > 0 else np.zeros(z0.pairs.shape)
    pairs = (1.0 - c) * np.abs(z0.pairs) * np.exp(1j * (np.angle(z0.pairs) + noise))
    return ZeroSet(real=(1.0 - c) * z0.real, pairs=pairs)


def interpolate_zeros(z0: ZeroSet, z1: ZeroSet, mu: float) -> ZeroSet:
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    if z0.real.shape != z1.real.shape or z0.pairs.shape != z1.pairs.shape:
        raise ValueError("zero sets must have matching structure")
    return ZeroSet(
        real=mu * z1.real + (1.0 - mu) * z0.real,
        pairs=mu * z1.pairs + (1.0 - mu) * z0.pairs,
    )


def fir_from_zeros(z: ZeroSet, target_energy: float | np.ndarray = 1.0) -> np.ndarray:
    """Taps of prod(1 - z_i q^-1) scaled to the target energy, shape (..., L)."""
    zeros = z.all_zeros()
    if zeros.shape[-1] == 0:
        taps = np.ones((*z.shape, 1))
    else:
        flat = zeros.reshape(-1, zeros.shape[-1])
        taps = np.stack([np.real(np.poly(row)) for row in flat]).reshape(*z.shape, z.L)
    energy = np.sum(taps**2, axis=-1, keepdims=True)
    target = np.broadcast_to(np.asarray(target_energy, dtype=float), z.shape)[..., None]
    return taps * np.sqrt(target / energy)


def draw_zero_bank(K: int, M: int, L: int, a: float, rng: np.random.Generator) -> ZeroSet:
    return draw_zeros(a, L, rng, shape=(K, M, M))


def bank_from_zeros(z: ZeroSet, eta: float) -> FirBank:
    """FirBank whose filters have the zeros z, batch shape (K, M, M), energies per eta."""
    if len(z.shape) != 3 or z.shape[1] != z.shape[2]:
        raise ValueError(f"zero bank must have batch shape (K, M, M), got {z.shape}")
    M = z.shape[1]
    energies = np.where(np.eye(M, dtype=bool), 1.0, eta)
    taps = fir_from_zeros(z, np.broadcast_to(energies, z.shape))
    return FirBank(taps, eta=eta)


__all__ = [
    "ZeroSet",
    "zero_counts",
    "draw_zeros",
    "perturb_zeros",
    "interpolate_zeros",
    "fir_from_zeros",
    "draw_zero_bank",
    "bank_from_zeros",
]
