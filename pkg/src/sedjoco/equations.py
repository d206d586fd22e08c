"""Extended SeDJoCo residual and its analytic Jacobian.

Row form: F_m = sum_k sum_l E_kk B^(l) Q_k^(l,m) B^(m)T - I. Flat vectors follow
the demixing layout, element (r, c) of F_m at r + c*K + m*K^2.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from src.core.errors import SingularJacobianError
from src.core.model import DemixingSet, TargetSet

COND_LIMIT = 1e12


def _check_dims(B: DemixingSet, Q: TargetSet) -> None:
    if B.M != Q.M or B.K != Q.K:
        raise ValueError(f"B has (M={B.M}, K={B.K}) but Q has (M={Q.M}, K={Q.K})")


def _transformed(B: DemixingSet, Q: TargetSet) -> np.ndarray:
    # D[k, m] = sum_l B^(l) Q_k^(l,m) B^(m)T
    return np.einsum("lab,klmbc,mdc->kmad", B.B, Q.Q, B.B, optimize=True)


@dataclass(frozen=True)
class ResidualF:
    F: np.ndarray

    def vec(self) -> np.ndarray:
        return self.F.transpose(0, 2, 1).reshape(-1)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.F)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.F))


def residual(B: DemixingSet, Q: TargetSet) -> ResidualF:
    _check_dims(B, Q)
    K = B.K
    D = _transformed(B, Q)
    rows = np.arange(K)
    F = D[rows, :, rows, :].transpose(1, 0, 2) - np.eye(K)
    return ResidualF(F)


@dataclass
class JacobianH:
    """Square Jacobian with columns ordered like the demixing vector."""

    matrix: np.ndarray
    _lu: tuple | None = field(default=None, repr=False)
    _cond: float | None = field(default=None, repr=False)

    def condition(self) -> float:
        if self._cond is None:
            self._cond = float(np.linalg.cond(self.matrix))
        return self._cond

    def factor(self, cond_limit: float = COND_LIMIT) -> tuple:
        if self._lu is None:
            cond = self.condition()
            if not np.isfinite(cond) or cond > cond_limit:
                raise SingularJacobianError(
                    f"Jacobian condition estimate {cond:.3e} exceeds {cond_limit:.0e}", cond
                )
            self._lu = lu_factor(self.matrix)
        return self._lu

    def solve(self, rhs: np.ndarray, cond_limit: float = COND_LIMIT) -> np.ndarray:
        return lu_solve(self.factor(cond_limit), rhs)


def jacobian(B: DemixingSet, Q: TargetSet) -> JacobianH:
    """dF_n/dB_pq^(m) = E_pq Q_p^(m,n) B^(n)T + delta_mn R^(m) E_qp.

    R^(m) holds in row k the k-th row of sum_l B^(l) Q_k^(l,m).
    """
    _check_dims(B, Q)
    M, K = B.M, B.K
    W = np.einsum("pmnab,ncb->pmnac", Q.Q, B.B, optimize=True)
    S = np.einsum("lab,klmbc->kmac", B.B, Q.Q, optimize=True)
    rows = np.arange(K)
    R = S[rows, :, rows, :].transpose(1, 0, 2)

    H = np.zeros((M * K * K, M * K * K))
    column = 0
    for m in range(M):
        for q in range(K):
            for p in range(K):
                dF = np.zeros((M, K, K))
                dF[:, p, :] = W[p, m, :, q, :]
                dF[m, :, p] += R[m, :, q]
                H[:, column] = dF.transpose(0, 2, 1).reshape(-1)
                column += 1
    return JacobianH(H)


def drilled_check(B: DemixingSet, Q: TargetSet) -> float:
    """Largest violation of the column drilled condition D_k^(m) e_k = e_k."""
    _check_dims(B, Q)
    K = B.K
    D = np.einsum("mab,kmlbc,ldc->kmad", B.B, Q.Q, B.B, optimize=True)
    rows = np.arange(K)
    columns = D[rows, :, :, rows]
    return float(np.max(np.abs(columns - np.eye(K)[:, None, :])))


__all__ = ["ResidualF", "JacobianH", "residual", "jacobian", "drilled_check", "COND_LIMIT"]
