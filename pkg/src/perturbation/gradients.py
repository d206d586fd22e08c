import logging
from dataclasses import dataclass

import numpy as np

from src.core.errors import SingularJacobianError
from src.core.indexing import FlatIndexMaps
from src.core.model import DemixingSet, ProblemDims, TargetSet
from src.sedjoco.equations import COND_LIMIT, JacobianH, jacobian

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradientMatrix:
    """G[r, c] = dB_r / dq_c with rows in demixing-vector order, columns canonical."""

    G: np.ndarray
    dims: ProblemDims

    @property
    def maps(self) -> FlatIndexMaps:
        return FlatIndexMaps.build(self.dims.M, self.dims.K)

    def row(self, m: int, p: int, q: int) -> np.ndarray:
        """g_pq^(m), 0-based."""
        return self.G[self.maps.b_flat(m, p, q)]

    def column(self, k: int, i: int, j: int, m1: int, m2: int) -> np.ndarray:
        return self.G[:, self.maps.q_flat(k, i, j, m1, m2)]


def _rhs_y0(k: int, i: int, j: int, m1: int, m2: int, B: np.ndarray) -> np.ndarray:
    M, K, _ = B.shape
    Y = np.zeros((M, K, K))
    Y[m2, k, :] += B[m1, k, i] * B[m2, :, j]
    if m1 != m2:
        Y[m1, k, :] += B[m2, k, j] * B[m1, :, i]
    elif i != j:
        Y[m2, k, :] += B[m1, k, j] * B[m2, :, i]
    return Y.transpose(0, 2, 1).reshape(-1)


def rhs_y(k: int, i: int, j: int, m1: int, m2: int, B: DemixingSet) -> np.ndarray:
    """vec of dF/dQ_{k,ij}^(m1,m2) at B, for the independent element (1-based indices).

    The symmetric duplicate Q_{k,ji}^(m2,m1) moves together with the element.
    """
    M, K = B.M, B.K
    for name, value, upper in (("k", k, K), ("i", i, K), ("j", j, K), ("m1", m1, M), ("m2", m2, M)):
        if not 1 <= value <= upper:
            raise ValueError(f"{name}={value} out of range 1..{upper}")
    maps = FlatIndexMaps.build(M, K)
    e = maps.canonical(k - 1, i - 1, j - 1, m1 - 1, m2 - 1)
    return _rhs_y0(e.k, e.i, e.j, e.m1, e.m2, B.B)


def rhs_matrix(B: DemixingSet) -> np.ndarray:
    """All right-hand sides stacked as columns in canonical order."""
    maps = FlatIndexMaps.build(B.M, B.K)
    Y = np.empty((maps.n_b, maps.n_q))
    for c, e in enumerate(maps.entries):
        Y[:, c] = _rhs_y0(e.k, e.i, e.j, e.m1, e.m2, B.B)
    return Y


def solve_gradients(
    H: JacobianH,
    dims: ProblemDims,
    B: DemixingSet | None = None,
    cond_limit: float = COND_LIMIT,
) -> GradientMatrix:
    """theta = -H^-1 y for every canonical target element, with H factorized once.

    Args:
        H: Jacobian at the operating point B.
        dims: problem dimensions.
        B: operating point; identity when omitted.
    """
    if B is None:
        B = DemixingSet.identity(dims.M, dims.K)
    if H.matrix.shape != (dims.n_b(), dims.n_b()):
        raise ValueError(f"Jacobian shape {H.matrix.shape} does not match {dims}")
    G = -H.solve(rhs_matrix(B), cond_limit)
    return GradientMatrix(G, dims)


@dataclass(frozen=True)
class PartialGradient:
    columns: np.ndarray
    G: np.ndarray


def closed_form_diag_gradients(
    Q_expected: TargetSet,
    dims: ProblemDims,
    gains: np.ndarray | None = None,
) -> PartialGradient:
    """Gradient columns for Q_{i,ii}^(m1,n1) at a diagonal operating point.

    Only the diagonal entries B_ii^(l) respond to these elements. For source i the
    M x M matrix beta(l, m) = g_m^i Q_{i,ii}^(l,m) + delta_lm sum_n g_n^i Q_{i,ii}^(n,l)
    couples them, and alpha solves beta^T alpha = -(y restricted to the diagonal).

    Args:
        Q_expected: diagonal targets.
        dims: problem dimensions.
        gains: (M, K) diagonal of the operating point; all ones (identity) when omitted.

    Raises:
        SingularJacobianError: beta is singular for some source.
    """
    M, K = dims.M, dims.K
    if gains is None:
        gains = np.ones((M, K))
    maps = FlatIndexMaps.build(M, K)
    Q = Q_expected.Q
    columns = []
    values = []
    for i in range(K):
        q = Q[i, :, :, i, i]
        g = gains[:, i]
        beta = q * g[None, :] + np.diag(g @ q)
        cond = np.linalg.cond(beta)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularJacobianError(f"beta matrix of source {i} is singular", cond)
        for n1 in range(M):
            for m1 in range(n1 + 1):
                rhs = np.zeros(M)
                rhs[n1] += g[m1] * g[n1]
                if m1 != n1:
                    rhs[m1] += g[m1] * g[n1]
                alpha = np.linalg.solve(beta.T, -rhs)
                theta = np.zeros(maps.n_b)
                for ell in range(M):
                    theta[maps.b_flat(ell, i, i)] = alpha[ell]
                columns.append(maps.q_flat(i, i, i, m1, n1))
                values.append(theta)
    order = np.argsort(columns)
    return PartialGradient(np.asarray(columns)[order], np.stack(values, axis=1)[:, order])


def gradients_at(B: DemixingSet, Q: TargetSet) -> GradientMatrix:
    dims = ProblemDims(M=B.M, K=B.K, T=1)
    return solve_gradients(jacobian(B, Q), dims, B)


__all__ = [
    "GradientMatrix",
    "PartialGradient",
    "rhs_y",
    "rhs_matrix",
    "solve_gradients",
    "closed_form_diag_gradients",
    "gradients_at",
]
