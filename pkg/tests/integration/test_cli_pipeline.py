"""End-to-end runs of the command-line pipeline at tiny scale."""

from pathlib import Path

import numpy as np
import pytest
import yaml

from main import main
from src.core.config import load_config
from src.harness.runner import EXPERIMENT_IDS, cmd_predict, cmd_simulate, experiment_config
from src.harness.selftest import cmd_selftest

ROOT = Path(__file__).resolve().parents[2]

TINY = {
    "id": "tiny",
    "dims": {"M": 2, "K": 2, "T": 100, "L": 3},
    "sources": {"eta": 0.3},
    "mismodel": {"a": 2.0, "b": 0.1, "c": 0.1},
    "grid": {"mu": [0.0, 0.5]},
    "monte_carlo": {"trials": 3, "master_seed": 11, "threads": 1},
    "report": {"out_dir": "results"},
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(TINY))
    return path


class TestPredict:
    def test_mu_zero_prediction_is_the_bound(self, config_path):
        rows = cmd_predict(load_config(config_path))
        np.testing.assert_array_equal(rows[0].predicted.values, rows[0].icrlb.values)
        assert rows[1].predicted_db >= rows[1].icrlb_db - 1e-9

    def test_cli_writes_csv(self, config_path, tmp_path):
        out = tmp_path / "out"
        assert main(["predict", "--config", str(config_path), "--out", str(out)]) == 0
        lines = (out / "tiny.csv").read_text().splitlines()
        assert lines[0].startswith("# version:")
        data = [line for line in lines if not line.startswith("#")]
        assert len(data) == 3

    def test_reruns_are_byte_identical(self, config_path, tmp_path):
        for name in ("a", "b"):
            main(["predict", "--config", str(config_path), "--out", str(tmp_path / name)])
        assert (tmp_path / "a" / "tiny.csv").read_bytes() == (tmp_path / "b" / "tiny.csv").read_bytes()


class TestSimulate:
    def test_cli_simulate(self, config_path, tmp_path):
        out = tmp_path / "sim"
        code = main(["simulate", "--config", str(config_path), "--trials", "2", "--seed", "5", "--out", str(out)])
        assert code == 0
        text = (out / "tiny.csv").read_text()
        assert "master_seed: 5" in text

    def test_rows_carry_empirical_tables(self, config_path):
        rows = cmd_simulate(load_config(config_path))
        assert all(row.trials == 3 and row.excluded == 0 for row in rows)
        assert not any(row.failed for row in rows)

    def test_missing_config_exits_with_error(self, tmp_path):
        assert main(["predict", "--config", str(tmp_path / "missing.yaml")]) == 1

    def test_invalid_override_exits_with_error(self, config_path):
        assert main(["predict", "--config", str(config_path), "--override", "sources.eta=3"]) == 1


class TestPresets:
    @pytest.mark.parametrize("exp_id", EXPERIMENT_IDS)
    def test_presets_load(self, exp_id):
        config = experiment_config(exp_id, experiments_dir=ROOT / "config" / "experiments")
        assert config.id == exp_id

    def test_full_scale(self):
        config = experiment_config("exp3", full_scale=True, experiments_dir=ROOT / "config" / "experiments")
        assert config.monte_carlo.trials == 1000
        assert config.dims.T == 10000

    def test_unknown_experiment(self):
        with pytest.raises(ValueError):
            experiment_config("exp9")


@pytest.mark.slow
class TestAgreement:
    def test_matched_model_prediction_tracks_empirical(self, tmp_path):
        raw = dict(TINY, grid={"mu": [0.0]}, dims={"M": 2, "K": 2, "T": 400, "L": 3})
        raw["monte_carlo"] = {"trials": 400, "master_seed": 2, "threads": 1}
        path = tmp_path / "agree.yaml"
        path.write_text(yaml.safe_dump(raw))
        row = cmd_simulate(load_config(path))[0]
        assert abs(row.empirical_db - row.predicted_db) < 1.0

    def test_selftest_passes(self):
        results = cmd_selftest()
        failed = [(r.name, r.detail) for r in results if not r.passed]
        assert not failed

    @pytest.fixture
    def mismatched_path(self, tmp_path):
        raw = dict(TINY, dims={"M": 2, "K": 3, "T": 500, "L": 4}, sources={"eta": 1.0})
        raw["monte_carlo"] = {"trials": 600, "master_seed": 12345, "threads": 1}
        path = tmp_path / "mismatched.yaml"
        path.write_text(yaml.safe_dump(raw))
        return path

    @pytest.mark.parametrize("mu", [0.2, 0.3, 1.0])
    def test_mismatched_model_prediction_tracks_empirical(self, mismatched_path, mu):
        config = load_config(mismatched_path, [f"grid.mu=[{mu}]"])
        row = cmd_simulate(config)[0]
        assert not row.failed
        assert abs(row.empirical_db - row.predicted_db) < 1.0

    def test_empirical_isr_does_not_depend_on_noise_family(self, mismatched_path):
        overrides = ["grid.mu=[0.5]", "grid.family=[gaussian, laplace, bernoulli]"]
        rows = cmd_simulate(load_config(mismatched_path, overrides))
        assert [row.point.family for row in rows] == ["gaussian", "laplace", "bernoulli"]
        predicted = {row.predicted_db for row in rows}
        assert len(predicted) == 1
        for row in rows:
            assert abs(row.empirical_db - row.predicted_db) < 1.0
