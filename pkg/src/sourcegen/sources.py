import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.covariance.fir import FirBank
from src.sourcegen.noise import NoiseSpec, gen_white


def gen_sources(bank: FirBank, spec: NoiseSpec, T: int, rng: np.random.Generator) -> np.ndarray:
    """Sources s_k^(m)[t] = sum_l (w_k^(l) * h_k^(m,l))[t] as an (M, K, T) array.

    L - 1 burn-in samples of driving noise precede t = 0, so the output is exactly
    stationary.
    """
    if not bank.is_normalized():
        raise ValueError("FIR bank is not energy-normalized; call normalize() first")
    if T < 1:
        raise ValueError("T must be positive")
    K, M, L = bank.K, bank.M, bank.L
    w = gen_white(spec, (K, M, T + L - 1), rng)
    windows = sliding_window_view(w, L, axis=-1)
    return np.einsum("kmlv,kltv->mkt", bank.taps[..., ::-1], windows, optimize=True)


def gen_mixture_sources(
    bank_a: FirBank,
    bank_b: FirBank,
    p: float,
    spec_a: NoiseSpec,
    spec_b: NoiseSpec,
    T: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-sample Bernoulli(p) switch between two independently generated source sets."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"switch probability must lie in (0, 1), got {p}")
    S_a = gen_sources(bank_a, spec_a, T, rng)
    S_b = gen_sources(bank_b, spec_b, T, rng)
    switch = rng.random(S_a.shape) < p
    return np.where(switch, S_a, S_b)


def gaussian_tap_bank(K: int, M: int, L: int, eta: float, rng: np.random.Generator) -> FirBank:
    return FirBank(rng.standard_normal((K, M, M, L)), eta=eta).normalize()


def mix(A: np.ndarray, S: np.ndarray) -> np.ndarray:
    """X^(m) = A^(m) S^(m) for (M, K, K) mixing matrices and (M, K, T) sources."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] != S.shape[0] or A.shape[2] != S.shape[1]:
        raise ValueError(f"mixing shape {A.shape} incompatible with sources {S.shape}")
    return np.einsum("mij,mjt->mit", A, S)


def random_mixing(M: int, K: int, rng: np.random.Generator, max_condition: float = 20.0) -> np.ndarray:
    """Standard Gaussian mixing matrices, redrawn until well-conditioned."""
    blocks = []
    for _ in range(M):
        while True:
            A = rng.standard_normal((K, K))
            if np.linalg.cond(A) <= max_condition:
                blocks.append(A)
                break
    return np.stack(blocks)


__all__ = ["gen_sources", "gen_mixture_sources", "gaussian_tap_bank", "mix", "random_mixing"]
