"""Flat index maps between multi-indexed symbols and vectors.

The public functions ``b_index``, ``q_index`` and ``q_enumerate`` take and return
1-based multi-indices (k, i, j, m1, m2) and (m, p, q), and return 0-based flat
positions. Everything else in the package works with 0-based indices through
``FlatIndexMaps``.

Layout of the demixing vector: element (p, q) of B^(m) sits at p + q*K + m*K^2.

Layout of the canonical target vector: blocks are scanned with m2 outer and m1
inner restricted to m1 <= m2, then k, then column j, then row i. Inside symmetric
blocks (m1 == m2) only the lower triangle i >= j is kept. Any other multi-index is
a duplicate and maps to its representative by swapping (i, j) and (m1, m2).
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from src.core.model import ProblemDims


@dataclass(frozen=True)
class QIndex:
    k: int
    i: int
    j: int
    m1: int
    m2: int

    @property
    def is_diagonal(self) -> bool:
        return self.i == self.j


@dataclass(frozen=True)
class FlatIndexMaps:
    """0-based index bookkeeping for one (M, K) problem size."""

    M: int
    K: int
    entries: tuple[QIndex, ...] = field(repr=False)
    positions: dict = field(repr=False, compare=False)

    @classmethod
    def build(cls, M: int, K: int) -> "FlatIndexMaps":
        return _maps(M, K)

    @property
    def n_q(self) -> int:
        return len(self.entries)

    @property
    def n_b(self) -> int:
        return self.K * self.K * self.M

    def b_flat(self, m: int, p: int, q: int) -> int:
        return p + q * self.K + m * self.K * self.K

    def canonical(self, k: int, i: int, j: int, m1: int, m2: int) -> QIndex:
        if m1 > m2 or (m1 == m2 and i < j):
            return QIndex(k, j, i, m2, m1)
        return QIndex(k, i, j, m1, m2)

    def q_flat(self, k: int, i: int, j: int, m1: int, m2: int) -> int:
        return self.positions[self.canonical(k, i, j, m1, m2)]

    def arrays(self) -> dict[str, np.ndarray]:
        """Columns of the canonical enumeration as integer arrays."""
        table = np.array([(e.k, e.i, e.j, e.m1, e.m2) for e in self.entries], dtype=int)
        return {name: table[:, n] for n, name in enumerate(("k", "i", "j", "m1", "m2"))}

    def vec_star(self, Q: np.ndarray) -> np.ndarray:
        """Canonical target vector from a (K, M, M, K, K) target array."""
        a = self.arrays()
        return Q[a["k"], a["m1"], a["m2"], a["i"], a["j"]]


@lru_cache(maxsize=32)
def _maps(M: int, K: int) -> FlatIndexMaps:
    entries = []
    for m2 in range(M):
        for m1 in range(m2 + 1):
            for k in range(K):
                for j in range(K):
                    for i in range(K):
                        if m1 == m2 and i < j:
                            continue
                        entries.append(QIndex(k, i, j, m1, m2))
    positions = {e: n for n, e in enumerate(entries)}
    return FlatIndexMaps(M=M, K=K, entries=tuple(entries), positions=positions)


def _check_range(name: str, value: int, upper: int) -> None:
    if not 1 <= value <= upper:
        raise ValueError(f"{name}={value} out of range 1..{upper}")


def b_index(m: int, p: int, q: int, dims: ProblemDims) -> int:
    """0-based position of B_pq^(m) (1-based inputs) in the demixing vector."""
    _check_range("m", m, dims.M)
    _check_range("p", p, dims.K)
    _check_range("q", q, dims.K)
    return FlatIndexMaps.build(dims.M, dims.K).b_flat(m - 1, p - 1, q - 1)


def q_index(k: int, i: int, j: int, m1: int, m2: int, dims: ProblemDims) -> int:
    """0-based position of Q_{k,ij}^(m1,m2) (1-based inputs) in the canonical vector."""
    for name, value, upper in (
        ("k", k, dims.K),
        ("i", i, dims.K),
        ("j", j, dims.K),
        ("m1", m1, dims.M),
        ("m2", m2, dims.M),
    ):
        _check_range(name, value, upper)
    return FlatIndexMaps.build(dims.M, dims.K).q_flat(k - 1, i - 1, j - 1, m1 - 1, m2 - 1)


def q_enumerate(dims: ProblemDims) -> list[tuple[int, int, int, int, int]]:
    """Canonical (k, i, j, m1, m2) multi-indices, 1-based, in flat order."""
    maps = FlatIndexMaps.build(dims.M, dims.K)
    return [(e.k + 1, e.i + 1, e.j + 1, e.m1 + 1, e.m2 + 1) for e in maps.entries]


__all__ = ["QIndex", "FlatIndexMaps", "b_index", "q_index", "q_enumerate"]
