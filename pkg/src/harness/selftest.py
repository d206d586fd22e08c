"""Invariant checks of the whole estimator and prediction chain at small sizes."""

import logging
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from src.core.indexing import FlatIndexMaps, q_enumerate, q_index
from src.core.model import DemixingSet, ProblemDims, TargetSet
from src.covariance.fir import FirBank
from src.covariance.scv import ScvCovariance, ScvPrecision, scv_covariance_from_firs, scv_precision
from src.perturbation.asymptotics import (
    asymptotic_gains,
    expected_targets,
    operating_point,
    phi_limits,
    scale_residual,
)
from src.perturbation.gradients import closed_form_diag_gradients, solve_gradients
from src.perturbation.isr import predict_pipeline
from src.perturbation.qcov import q_covariance_identity
from src.perturbation.traces import ExactTraceEngine, SpectralTraceEngine
from src.sedjoco.equations import drilled_check, jacobian, residual
from src.sedjoco.newton import newton_solve
from src.sedjoco.targets import compute_targets
from src.sourcegen.noise import NoiseSpec
from src.sourcegen.sources import gen_sources, mix, random_mixing

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def random_bank(K: int, M: int, L: int, eta: float, rng: np.random.Generator) -> FirBank:
    """Normalized bank with a dominant leading tap, so every SCV covariance is well conditioned."""
    taps = 0.25 * rng.standard_normal((K, M, M, L))
    taps[..., 0] = 1.0
    return FirBank(taps, eta=eta).normalize()


def perturbed_bank(bank: FirBank, scale: float, rng: np.random.Generator) -> FirBank:
    noisy = bank.taps + scale * rng.standard_normal(bank.taps.shape)
    return FirBank(noisy, eta=bank.eta).normalize()


def bank_covariances(bank: FirBank, T: int) -> list[ScvCovariance]:
    return [scv_covariance_from_firs(bank, k, T) for k in range(bank.K)]


def sample_targets(
    bank: FirBank, presumed: FirBank, T: int, rng: np.random.Generator
) -> tuple[TargetSet, np.ndarray]:
    S = gen_sources(bank, NoiseSpec(), T, rng)
    precisions = [scv_precision(cov) for cov in bank_covariances(presumed, T)]
    return compute_targets(S, precisions), S


def finite_difference_jacobian(B: DemixingSet, Q: TargetSet) -> np.ndarray:
    vec = B.vec()
    H = np.zeros((vec.size, vec.size))
    for n in range(vec.size):
        h = 1e-6 * (1.0 + abs(vec[n]))
        up, down = vec.copy(), vec.copy()
        up[n] += h
        down[n] -= h
        F_up = residual(DemixingSet.from_vec(up, B.M, B.K), Q).vec()
        F_down = residual(DemixingSet.from_vec(down, B.M, B.K), Q).vec()
        H[:, n] = (F_up - F_down) / (2.0 * h)
    return H


def finite_difference_gradients(
    B: DemixingSet, Q: TargetSet, columns: Sequence[int], step: float = 1e-5
) -> np.ndarray:
    """dB/dq by re-solving with each canonical target element shifted by +-step."""
    maps = FlatIndexMaps.build(B.M, B.K)
    out = np.zeros((maps.n_b, len(columns)))
    for n, c in enumerate(columns):
        e = maps.entries[c]
        value = Q.Q[e.k, e.m1, e.m2, e.i, e.j]
        B_up, _ = newton_solve(Q.with_element(e.k, e.i, e.j, e.m1, e.m2, value + step), B, 1e-12)
        B_down, _ = newton_solve(Q.with_element(e.k, e.i, e.j, e.m1, e.m2, value - step), B, 1e-12)
        out[:, n] = (B_up.vec() - B_down.vec()) / (2.0 * step)
    return out


def isserlis_covariance(
    true_covs: Sequence[ScvCovariance], precisions: Sequence[ScvPrecision], dims: ProblemDims
) -> np.ndarray:
    """Target covariance by explicit Gaussian fourth-moment sums over all time indices."""
    maps = FlatIndexMaps.build(dims.M, dims.K)
    T = dims.T
    blocks = [[[cov.block(a, b) for b in range(dims.M)] for a in range(dims.M)] for cov in true_covs]

    def cross(src1: int, m: int, src2: int, n: int) -> np.ndarray:
        return blocks[src1][m][n] if src1 == src2 else np.zeros((T, T))

    C = np.zeros((maps.n_q, maps.n_q))
    for r1, e1 in enumerate(maps.entries):
        A = precisions[e1.k].block(e1.m1, e1.m2)
        for r2, e2 in enumerate(maps.entries):
            B = precisions[e2.k].block(e2.m1, e2.m2)
            uw = cross(e1.i, e1.m1, e2.i, e2.m1)
            vz = cross(e1.j, e1.m2, e2.j, e2.m2)
            uz = cross(e1.i, e1.m1, e2.j, e2.m2)
            vw = cross(e1.j, e1.m2, e2.i, e2.m1)
            C[r1, r2] = (
                np.einsum("ab,cd,ac,bd->", A, B, uw, vz) + np.einsum("ab,cd,ad,bc->", A, B, uz, vw)
            ) / T**2
    return C


def _relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def check_index_maps(rng: np.random.Generator) -> tuple[bool, str]:
    for M, K in ((1, 1), (2, 3), (3, 2)):
        dims = ProblemDims(M=M, K=K, T=1)
        entries = q_enumerate(dims)
        if len(entries) != dims.M_q():
            return False, f"count {len(entries)} != {dims.M_q()} for M={M}, K={K}"
        if any(q_index(*e, dims) != n for n, e in enumerate(entries)):
            return False, f"round trip broken for M={M}, K={K}"
        for k, i, j, m1, m2 in entries:
            if q_index(k, i, j, m1, m2, dims) != q_index(k, j, i, m2, m1, dims):
                return False, "duplicate does not collapse"
    return True, "bijections verified"


def check_jacobian(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for M, K in ((1, 2), (2, 2), (3, 2)):
        bank = random_bank(K, M, 3, 0.2, rng)
        Q, _ = sample_targets(bank, bank, 32, rng)
        B = DemixingSet(np.eye(K) + 0.1 * rng.standard_normal((M, K, K)))
        worst = max(worst, _relative_gap(finite_difference_jacobian(B, Q), jacobian(B, Q).matrix))
    return worst <= 1e-6, f"max relative gap {worst:.2e}"


def check_gradients(rng: np.random.Generator) -> tuple[bool, str]:
    bank = random_bank(2, 2, 3, 0.2, rng)
    presumed = perturbed_bank(bank, 0.1, rng)
    Q, _ = sample_targets(bank, presumed, 64, rng)
    B, _ = newton_solve(Q, DemixingSet.identity(2, 2), 1e-12)
    dims = ProblemDims(M=2, K=2, T=64)
    G = solve_gradients(jacobian(B, Q), dims, B).G
    columns = list(range(dims.M_q()))
    gap = _relative_gap(finite_difference_gradients(B, Q, columns), G[:, columns])
    return gap <= 1e-4, f"max relative gap {gap:.2e} over {len(columns)} columns"


def check_closed_form(rng: np.random.Generator) -> tuple[bool, str]:
    bank = random_bank(2, 2, 4, 0.2, rng)
    presumed = perturbed_bank(bank, 0.1, rng)
    engine = ExactTraceEngine.from_covariances(bank_covariances(bank, 48), bank_covariances(presumed, 48))
    dims = ProblemDims(M=2, K=2, T=48)
    Q = expected_targets(engine, dims)
    gains = asymptotic_gains(phi_limits(engine), dims)
    B_o = operating_point(gains)
    G = solve_gradients(jacobian(B_o, Q), dims, B_o).G
    partial = closed_form_diag_gradients(Q, dims, gains)
    gap = float(np.max(np.abs(partial.G - G[:, partial.columns])))
    maps = FlatIndexMaps.build(2, 2)
    ii_columns = [n for n, e in enumerate(maps.entries) if e.i == e.j]
    off_rows = [maps.b_flat(m, p, q) for m in range(2) for p in range(2) for q in range(2) if p != q]
    leak = float(np.max(np.abs(G[np.ix_(off_rows, ii_columns)])))
    passed = gap <= 1e-10 and leak <= 1e-10
    return passed, f"closed-form gap {gap:.2e}, off-diagonal response to i=j columns {leak:.2e}"


def check_isserlis(rng: np.random.Generator) -> tuple[bool, str]:
    bank = random_bank(2, 2, 2, 0.2, rng)
    presumed = perturbed_bank(bank, 0.1, rng)
    dims = ProblemDims(M=2, K=2, T=4)
    true_covs = bank_covariances(bank, 4)
    precisions = [scv_precision(cov) for cov in bank_covariances(presumed, 4)]
    C_q = q_covariance_identity(ExactTraceEngine(true_covs, precisions), dims).C
    gap = _relative_gap(C_q, isserlis_covariance(true_covs, precisions, dims))
    return gap <= 1e-10, f"max relative gap {gap:.2e}"


def check_precision(rng: np.random.Generator) -> tuple[bool, str]:
    bank = random_bank(2, 3, 4, 0.2, rng)
    worst = 0.0
    for cov in bank_covariances(bank, 40):
        P = scv_precision(cov)
        worst = max(worst, float(np.max(np.abs(cov.dense() @ P.dense() - np.eye(cov.M * cov.T)))))
    return worst <= 1e-8, f"max |CP - I| {worst:.2e}"


def check_solver(rng: np.random.Generator) -> tuple[bool, str]:
    M, K, T = 2, 3, 200
    bank = random_bank(K, M, 4, 0.2, rng)
    S = gen_sources(bank, NoiseSpec(), T, rng)
    precisions = [scv_precision(cov) for cov in bank_covariances(bank, T)]
    A = random_mixing(M, K, rng)
    B_plain, _ = newton_solve(compute_targets(S, precisions), DemixingSet.identity(M, K), 1e-12)
    Q_mixed = compute_targets(mix(A, S), precisions)
    B_mixed, report = newton_solve(Q_mixed, DemixingSet(np.linalg.inv(A)), 1e-12)
    drilled = drilled_check(B_mixed, Q_mixed)
    gap = float(np.max(np.abs(B_mixed.global_matrices(A) - B_plain.B)))
    passed = drilled <= 1e-10 and gap <= 1e-8
    return passed, f"drilled {drilled:.2e}, equivariance gap {gap:.2e}, {report.iterations} iterations"


def check_scale_equations(rng: np.random.Generator) -> tuple[bool, str]:
    bank = random_bank(3, 2, 4, 0.2, rng)
    presumed = perturbed_bank(bank, 0.1, rng)
    engine = ExactTraceEngine.from_covariances(bank_covariances(bank, 64), bank_covariances(presumed, 64))
    dims = ProblemDims(M=2, K=3, T=64)
    phi = phi_limits(engine)
    gains = asymptotic_gains(phi, dims)
    res = scale_residual(phi, gains)
    B_o = operating_point(gains)
    F = residual(B_o, expected_targets(engine, dims)).max_abs()
    return res <= 1e-10 and F <= 1e-10, f"scale residual {res:.2e}, SeDJoCo residual {F:.2e}"


def check_diagonal_dominance(rng: np.random.Generator) -> tuple[bool, str]:
    bank = random_bank(2, 2, 3, 0.2, rng)
    presumed = perturbed_bank(bank, 0.1, rng)
    ratios = []
    for T in (200, 3200):
        Q, _ = sample_targets(bank, presumed, T, rng)
        ratios.append(Q.offdiag_ratio())
    engine = ExactTraceEngine.from_covariances(bank_covariances(bank, 64), bank_covariances(presumed, 64))
    phi = phi_limits(engine).values
    passed = ratios[1] < ratios[0] and ratios[1] <= 0.2
    detail = (
        f"off-diagonal ratio {ratios[0]:.3f} at T=200, {ratios[1]:.3f} at T=3200; "
        f"phi range [{phi.min():.3f}, {phi.max():.3f}]"
    )
    return passed, detail


def check_scaling(rng: np.random.Generator) -> tuple[bool, str]:
    bank = random_bank(2, 2, 3, 0.2, rng)
    presumed = perturbed_bank(bank, 0.1, rng)
    dims = ProblemDims(M=2, K=2, T=256)
    totals = []
    for T in (256, 512):
        engine = ExactTraceEngine.from_covariances(bank_covariances(bank, T), bank_covariances(presumed, T))
        totals.append(predict_pipeline(engine, dims.with_T(T)).isr.total_normalized)
    ratio = totals[0] / totals[1]
    return abs(ratio - 2.0) <= 0.05, f"ISR(T)/ISR(2T) = {ratio:.4f}"


def check_spectral_limit(rng: np.random.Generator) -> tuple[bool, str]:
    bank = random_bank(2, 2, 3, 0.2, rng)
    presumed = perturbed_bank(bank, 0.1, rng)
    T = 1024
    exact = ExactTraceEngine.from_covariances(bank_covariances(bank, T), bank_covariances(presumed, T))
    spectral = SpectralTraceEngine(bank_covariances(bank, T), bank_covariances(presumed, T), T, 2048)
    gap = _relative_gap(phi_limits(spectral).values, phi_limits(exact).values)
    return gap <= 0.02, f"exact vs spectral trace gap {gap:.2e}"


CHECKS: dict[str, Callable[[np.random.Generator], tuple[bool, str]]] = {
    "index maps": check_index_maps,
    "jacobian vs finite differences": check_jacobian,
    "gradients vs finite differences through solver": check_gradients,
    "closed-form diagonal gradients": check_closed_form,
    "target covariance vs Isserlis sums": check_isserlis,
    "precision residual": check_precision,
    "drilled condition and equivariance": check_solver,
    "scale equations": check_scale_equations,
    "diagonal dominance of targets": check_diagonal_dominance,
    "1/T scaling": check_scaling,
    "spectral limit": check_spectral_limit,
}


def cmd_selftest(seed: int = 0) -> list[CheckResult]:
    results = []
    for n, (name, check) in enumerate(CHECKS.items()):
        rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
        start = time.perf_counter()
        try:
            passed, detail = check(rng)
        except Exception as e:  # a crash is a failed check
            passed, detail = False, f"{type(e).__name__}: {e}"
        elapsed = time.perf_counter() - start
        logger.info(f"{'PASS' if passed else 'FAIL'} {name}: {detail} ({elapsed:.1f}s)")
        results.append(CheckResult(name, passed, detail, elapsed))
    return results


__all__ = [
    "CheckResult",
    "CHECKS",
    "cmd_selftest",
    "random_bank",
    "perturbed_bank",
    "bank_covariances",
    "sample_targets",
    "finite_difference_jacobian",
    "finite_difference_gradients",
    "isserlis_covariance",
]
