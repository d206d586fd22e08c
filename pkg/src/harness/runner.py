import logging
import time
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from src.core.config import ExperimentConfig, load_config
from src.core.errors import GridPointError, SedjocoError
from src.harness.report import (
    CsvResultWriter,
    LogReporter,
    ResultObserver,
    ResultRow,
    metadata_for,
    plot_axis,
    write_plot_script,
)
from src.harness.scenarios import MIXING_STREAM, Scenario, build_scenario, draw_banks, grid_points
from src.harness.trials import QmleSeparator, Separator, TrialTask, run_trials
from src.perturbation.isr import IsrTable, predict_pipeline
from src.perturbation.traces import make_trace_engine
from src.sourcegen.metrics import empirical_isr
from src.sourcegen.sources import random_mixing

logger = logging.getLogger(__name__)

EXPERIMENTS_DIR = Path("config/experiments")
EXPERIMENT_IDS = ("exp1-mu", "exp1-T", "exp2", "exp3")
FULL_SCALE = {
    "exp1-mu": ["monte_carlo.trials=10000"],
    "exp1-T": ["monte_carlo.trials=10000"],
    "exp2": ["monte_carlo.trials=10000"],
    "exp3": ["monte_carlo.trials=1000", "dims.T=10000"],
}


def _engine_options(config: ExperimentConfig) -> dict:
    p = config.prediction
    return {
        "method": p.trace_method,
        "exact_limit": p.exact_limit,
        "cache_mb": p.cache_mb,
        "n_freq": p.spectral_grid,
    }


def predict_scenario(config: ExperimentConfig, scenario: Scenario) -> tuple[IsrTable, IsrTable]:
    """Predicted ISR under the presumed model and the matched-model bound."""
    options = _engine_options(config)
    engine = make_trace_engine(scenario.true_covs, scenario.presumed_covs, **options)
    predicted = predict_pipeline(engine, scenario.dims).isr
    bound_engine = make_trace_engine(scenario.true_covs, scenario.true_covs, **options)
    bound = predict_pipeline(bound_engine, scenario.dims).isr
    return predicted, bound


def mixing_matrices(config: ExperimentConfig, point_index: int) -> np.ndarray:
    M, K = config.dims.M, config.dims.K
    if config.monte_carlo.mixing == "identity":
        return np.broadcast_to(np.eye(K), (M, K, K)).copy()
    seed = np.random.SeedSequence([config.monte_carlo.master_seed, MIXING_STREAM, point_index])
    return random_mixing(M, K, np.random.default_rng(seed))


def initial_demixing(config: ExperimentConfig, A: np.ndarray) -> np.ndarray:
    match config.solver.init:
        case "true":
            return np.linalg.inv(A)
        case "identity":
            return np.broadcast_to(np.eye(A.shape[1]), A.shape).copy()
        case _:
            B0 = np.load(config.solver.init_path)
            if B0.shape != A.shape:
                raise ValueError(f"initial demixing has shape {B0.shape}, expected {A.shape}")
            return B0


def _dispatch(row: ResultRow, observers: Sequence[ResultObserver]) -> None:
    for observer in observers:
        observer.on_row(row)


def cmd_predict(
    config: ExperimentConfig, observers: Sequence[ResultObserver] = ()
) -> list[ResultRow]:
    """Prediction-only rows for every grid point."""
    draw = draw_banks(config)
    rows = []
    for point in grid_points(config):
        start = time.perf_counter()
        try:
            scenario = build_scenario(config, draw, point)
            predicted, bound = predict_scenario(config, scenario)
        except SedjocoError as e:
            raise GridPointError(point.label, e) from e
        row = ResultRow(
            experiment=config.id,
            point=point,
            predicted=predicted,
            icrlb=bound,
            wall_time=time.perf_counter() - start,
        )
        _dispatch(row, observers)
        rows.append(row)
    return rows


def cmd_simulate(
    config: ExperimentConfig,
    observers: Sequence[ResultObserver] = (),
    separator: Separator | None = None,
    progress: bool = False,
) -> list[ResultRow]:
    """Prediction plus Monte-Carlo trials for every grid point.

    A grid point whose excluded-trial fraction exceeds the budget is marked failed.
    """
    separator = separator or QmleSeparator(tol=config.solver.tol, max_iter=config.solver.max_iter)
    mc = config.monte_carlo
    draw = draw_banks(config)
    rows = []
    for point in grid_points(config):
        logger.info(f"[{config.id}] grid point {point.index}: {point.label}")
        start = time.perf_counter()
        try:
            scenario = build_scenario(config, draw, point)
            predicted, bound = predict_scenario(config, scenario)
        except SedjocoError as e:
            raise GridPointError(point.label, e) from e

        A = mixing_matrices(config, point.index)
        task = TrialTask(
            source_model=scenario.source_model,
            presumed_covs=scenario.presumed_covs,
            A=A,
            B0=initial_demixing(config, A),
            T=point.T,
            separator=separator,
        )
        outputs = run_trials(task, mc.trials, mc.master_seed, point.index, mc.threads, progress)
        powers = np.stack([cov.source_powers() for cov in scenario.true_covs], axis=1)
        empirical = empirical_isr(outputs, A, powers, mc.resolve_permutation)
        failed = empirical.excluded > mc.excluded_budget * mc.trials
        if failed:
            logger.warning(
                f"[{config.id}] {point.label}: {empirical.excluded} of {mc.trials} trials excluded, "
                f"over the {mc.excluded_budget:.1%} budget"
            )
        row = ResultRow(
            experiment=config.id,
            point=point,
            predicted=predicted,
            icrlb=bound,
            empirical=empirical,
            failed=failed,
            wall_time=time.perf_counter() - start,
        )
        _dispatch(row, observers)
        rows.append(row)
    return rows


def experiment_config(
    exp_id: str,
    overrides: Sequence[str] = (),
    full_scale: bool = False,
    experiments_dir: str | Path = EXPERIMENTS_DIR,
) -> ExperimentConfig:
    if exp_id not in EXPERIMENT_IDS:
        raise ValueError(f"unknown experiment {exp_id!r} (expected one of {EXPERIMENT_IDS})")
    extra = list(FULL_SCALE[exp_id]) if full_scale else []
    return load_config(Path(experiments_dir) / f"{exp_id}.yaml", extra + list(overrides))


def run_to_csv(
    config: ExperimentConfig,
    out_dir: str | Path,
    simulate: bool = True,
    emit_plots: bool = False,
    progress: bool = False,
) -> tuple[Path, list[ResultRow]]:
    """Run a configuration and write its CSV (and optional plot script)."""
    path = Path(out_dir) / f"{config.id}.csv"
    method = config.prediction.trace_method
    writer = CsvResultWriter(
        path, metadata_for(config.to_dict(), method), include_timing=config.report.include_timing
    )
    observers: list[ResultObserver] = [writer, LogReporter()]
    try:
        if simulate:
            rows = cmd_simulate(config, observers, progress=progress)
        else:
            rows = cmd_predict(config, observers)
    finally:
        for observer in observers:
            observer.on_finished()
    if emit_plots or config.report.emit_plots:
        script = write_plot_script(path, plot_axis([row.point for row in rows]))
        logger.info(f"Plot script written to {script}")
    return path, rows


def cmd_experiment(
    exp_id: str,
    overrides: Sequence[str] = (),
    out_dir: str | Path | None = None,
    full_scale: bool = False,
    emit_plots: bool = False,
    progress: bool = False,
) -> tuple[Path, list[ResultRow]]:
    config = experiment_config(exp_id, overrides, full_scale)
    logger.info(f"Running experiment {exp_id} ({config.monte_carlo.trials} trials per point)")
    return run_to_csv(config, out_dir or config.report.out_dir, True, emit_plots, progress)


__all__ = [
    "EXPERIMENT_IDS",
    "predict_scenario",
    "mixing_matrices",
    "initial_demixing",
    "cmd_predict",
    "cmd_simulate",
    "experiment_config",
    "run_to_csv",
    "cmd_experiment",
]
