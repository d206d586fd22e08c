from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ProblemDims:
    """Problem size: M datasets of K sources with T samples, FIR length L."""

    M: int
    K: int
    T: int
    L: int = 1

    def __post_init__(self):
        if self.M < 1 or self.K < 1 or self.T < 1 or self.L < 1:
            raise ValueError(f"dimensions must be positive, got {self}")

    def M_q(self) -> int:
        return self.M * self.K * self.K * (1 + self.M * self.K) // 2

    def n_b(self) -> int:
        return self.K * self.K * self.M

    def with_T(self, T: int) -> "ProblemDims":
        return ProblemDims(M=self.M, K=self.K, T=T, L=self.L)


@dataclass(frozen=True)
class DemixingSet:
    """The M demixing matrices B^(m), stored as an (M, K, K) array."""

    B: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        if B.ndim != 3 or B.shape[1] != B.shape[2]:
            raise ValueError(f"B must have shape (M, K, K), got {B.shape}")
        object.__setattr__(self, "B", B)

    @classmethod
    def identity(cls, M: int, K: int) -> "DemixingSet":
        return cls(np.broadcast_to(np.eye(K), (M, K, K)).copy())

    @classmethod
    def from_vec(cls, vec: np.ndarray, M: int, K: int) -> "DemixingSet":
        # element (p, q) of block m sits at p + q*K + m*K^2
        return cls(np.asarray(vec, dtype=float).reshape(M, K, K).transpose(0, 2, 1))

    @property
    def M(self) -> int:
        return self.B.shape[0]

    @property
    def K(self) -> int:
        return self.B.shape[1]

    def vec(self) -> np.ndarray:
        return self.B.transpose(0, 2, 1).reshape(-1).copy()

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.B)))

    def global_matrices(self, A: np.ndarray) -> np.ndarray:
        """T^(m) = B^(m) A^(m) for a stack of mixing matrices."""
        return np.einsum("mij,mjk->mik", self.B, A)


@dataclass(frozen=True)
class TargetSet:
    """Target matrices Q_k^(m1,m2) stored as a (K, M, M, K, K) array."""

    Q: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if Q.ndim != 5 or Q.shape[0] != Q.shape[3] or Q.shape[3] != Q.shape[4]:
            raise ValueError(f"Q must have shape (K, M, M, K, K), got {Q.shape}")
        if Q.shape[1] != Q.shape[2]:
            raise ValueError(f"Q must have square dataset grid, got {Q.shape}")
        object.__setattr__(self, "Q", Q)

    @property
    def K(self) -> int:
        return self.Q.shape[0]

    @property
    def M(self) -> int:
        return self.Q.shape[1]

    def block(self, k: int, m1: int, m2: int) -> np.ndarray:
        return self.Q[k, m1, m2]

    def omega(self, k: int) -> np.ndarray:
        """Stacked KM x KM matrix with (m1, m2) block Q_k^(m1,m2)."""
        M, K = self.M, self.K
        return self.Q[k].transpose(0, 2, 1, 3).reshape(M * K, M * K)

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.Q - self.Q.transpose(0, 2, 1, 4, 3))))

    def is_diagonal(self, atol: float = 0.0) -> bool:
        K = self.K
        off = self.Q * (1.0 - np.eye(K))
        return bool(np.max(np.abs(off)) <= atol)

    def offdiag_ratio(self) -> float:
        """Largest |off-diagonal| over largest |diagonal| entry across all blocks."""
        K = self.K
        eye = np.eye(K, dtype=bool)
        diag = np.max(np.abs(self.Q[..., eye]))
        off = np.max(np.abs(self.Q[..., ~eye])) if K > 1 else 0.0
        return float(off / diag) if diag > 0 else float("inf")

    def with_element(self, k: int, i: int, j: int, m1: int, m2: int, value: float) -> "TargetSet":
        """Copy with Q_{k,ij}^(m1,m2) and its symmetric duplicate set to value."""
        Q = self.Q.copy()
        Q[k, m1, m2, i, j] = value
        Q[k, m2, m1, j, i] = value
        return TargetSet(Q)


__all__ = ["ProblemDims", "DemixingSet", "TargetSet"]
