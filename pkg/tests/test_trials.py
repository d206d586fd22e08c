import numpy as np
import pytest

from src.core.config import apply_overrides, config_from_dict
from src.core.errors import NoConvergenceError
from src.core.model import DemixingSet
from src.harness.scenarios import build_scenario, draw_banks, grid_points
from src.harness.trials import QmleSeparator, TrialTask, run_trials, trial_seed

BASE = {
    "id": "tiny",
    "dims": {"M": 2, "K": 2, "T": 80, "L": 3},
    "sources": {"eta": 0.3},
    "monte_carlo": {"trials": 4, "master_seed": 3, "threads": 1},
}


class FailingSeparator:
    def separate(self, X, precisions, B0):
        raise NoConvergenceError("always fails")


@pytest.fixture
def task():
    config = config_from_dict(BASE)
    scenario = build_scenario(config, draw_banks(config), grid_points(config)[0])
    A = np.broadcast_to(np.eye(2), (2, 2, 2)).copy()
    return TrialTask(
        source_model=scenario.source_model,
        presumed_covs=scenario.presumed_covs,
        A=A,
        B0=A.copy(),
        T=80,
        separator=QmleSeparator(),
    )


class TestTrialSeed:
    def test_streams_differ(self):
        a = np.random.default_rng(trial_seed(1, 0, 0)).random()
        b = np.random.default_rng(trial_seed(1, 0, 1)).random()
        c = np.random.default_rng(trial_seed(1, 1, 0)).random()
        assert len({a, b, c}) == 3


class TestRunTrials:
    def test_results_in_order_and_converged(self, task):
        results = run_trials(task, 5, master_seed=3, point_index=0)
        assert len(results) == 5
        assert all(isinstance(B, DemixingSet) for B in results)

    def test_reproducible(self, task):
        first = run_trials(task, 3, master_seed=3, point_index=0)
        second = run_trials(task, 3, master_seed=3, point_index=0)
        for a, b in zip(first, second, strict=True):
            np.testing.assert_array_equal(a.B, b.B)

    def test_trial_result_independent_of_batching(self, task):
        few = run_trials(task, 2, master_seed=3, point_index=0)
        many = run_trials(task, 6, master_seed=3, point_index=0)
        np.testing.assert_array_equal(few[1].B, many[1].B)

    def test_failures_become_none(self, task):
        failing = TrialTask(
            source_model=task.source_model,
            presumed_covs=task.presumed_covs,
            A=task.A,
            B0=task.B0,
            T=task.T,
            separator=FailingSeparator(),
        )
        assert run_trials(failing, 2, master_seed=3, point_index=0) == [None, None]

    def test_rejects_zero_trials(self, task):
        with pytest.raises(ValueError):
            run_trials(task, 0, master_seed=3, point_index=0)

    @pytest.mark.slow
    def test_worker_processes_match_serial(self, task):
        serial = run_trials(task, 6, master_seed=3, point_index=0)
        parallel = run_trials(task, 6, master_seed=3, point_index=0, workers=2)
        for a, b in zip(serial, parallel, strict=True):
            np.testing.assert_array_equal(a.B, b.B)
