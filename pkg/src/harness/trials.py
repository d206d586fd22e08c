"""Seeded Monte-Carlo trials, optionally spread over worker processes."""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from tqdm import tqdm

from src.core.errors import SedjocoError
from src.core.model import DemixingSet
from src.covariance.scv import BandedPrecision, ScvCovariance
from src.harness.scenarios import TRIAL_STREAM, SourceModel
from src.sedjoco.newton import newton_solve
from src.sedjoco.targets import PrecisionOperator, compute_targets
from src.sourcegen.sources import mix

logger = logging.getLogger(__name__)


class Separator(Protocol):
    """Plug-in point for separation algorithms run by the harness."""

    def separate(
        self, X: np.ndarray, precisions: Sequence[PrecisionOperator], B0: DemixingSet
    ) -> DemixingSet: ...


@dataclass(frozen=True)
class QmleSeparator:
    """Gaussian quasi-ML separation: targets from presumed precisions, then Newton."""

    tol: float = 1e-10
    max_iter: int = 50

    def separate(
        self, X: np.ndarray, precisions: Sequence[PrecisionOperator], B0: DemixingSet
    ) -> DemixingSet:
        B, report = newton_solve(compute_targets(X, precisions), B0, self.tol, self.max_iter)
        logger.debug(f"Trial solved in {report.iterations} iterations")
        return B


@dataclass(frozen=True)
class TrialTask:
    source_model: SourceModel
    presumed_covs: tuple[ScvCovariance, ...]
    A: np.ndarray
    B0: np.ndarray
    T: int
    separator: Separator


def trial_seed(master_seed: int, point_index: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, TRIAL_STREAM, point_index, trial])


def run_trial(
    task: TrialTask, precisions: Sequence[PrecisionOperator], seed: np.random.SeedSequence
) -> np.ndarray | None:
    rng = np.random.default_rng(seed)
    S = task.source_model.draw(task.T, rng)
    X = mix(task.A, S)
    try:
        B = task.separator.separate(X, precisions, DemixingSet(task.B0))
    except (SedjocoError, np.linalg.LinAlgError) as e:
        logger.debug(f"Trial failed: {e}")
        return None
    return B.B if B.is_finite() else None


def _run_batch(task: TrialTask, seeds: list[np.random.SeedSequence]) -> list[np.ndarray | None]:
    # Must be at module level so ProcessPoolExecutor can pickle it
    precisions = [BandedPrecision(cov) for cov in task.presumed_covs]
    return [run_trial(task, precisions, seed) for seed in seeds]


def run_trials(
    task: TrialTask,
    n_trials: int,
    master_seed: int,
    point_index: int,
    workers: int = 1,
    progress: bool = False,
) -> list[DemixingSet | None]:
    """Run n_trials independent trials; results are in trial-index order.

    Returns:
        One DemixingSet per trial, None where the separator failed.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    seeds = [trial_seed(master_seed, point_index, t) for t in range(n_trials)]
    n_batches = min(n_trials, max(1, workers * 4))
    size = math.ceil(n_trials / n_batches)
    batches = [seeds[n : n + size] for n in range(0, n_trials, size)]

    results: list[np.ndarray | None] = []
    if workers <= 1:
        iterator = tqdm(batches, desc="Trials", disable=not progress, leave=False)
        for batch in iterator:
            results.extend(_run_batch(task, batch))
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            mapped = executor.map(_run_batch, [task] * len(batches), batches)
            for chunk in tqdm(mapped, total=len(batches), desc="Trials", disable=not progress, leave=False):
                results.extend(chunk)
    return [DemixingSet(B) if B is not None else None for B in results]


__all__ = ["Separator", "QmleSeparator", "TrialTask", "trial_seed", "run_trial", "run_trials"]
