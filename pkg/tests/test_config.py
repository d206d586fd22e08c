import pytest

from src.core.config import apply_overrides, config_from_dict, load_config


class TestConfig:
    @pytest.fixture
    def config_file(self, tmp_path):
        config_content = """
id: unit
dims:
  M: 2
  K: 3
  T: 200
  L: 4
sources:
  eta: 0.5
mismodel:
  a: 2.0
  b: 0.1
  c: 0.1
grid:
  mu: [0.0, 1.0]
monte_carlo:
  trials: 10
  master_seed: 7
  threads: "${SEDJOCO_TEST_THREADS:-3}"
report:
  out_dir: "${SEDJOCO_TEST_OUT:-results}"
"""
        config_path = tmp_path / "settings.yaml"
        config_path.write_text(config_content)
        return config_path

    def test_load_config(self, config_file):
        config = load_config(str(config_file))
        assert config.id == "unit"
        assert config.dims.M == 2
        assert config.sources.eta == 0.5
        assert config.grid.mu == [0.0, 1.0]

    def test_defaults(self, config_file):
        config = load_config(str(config_file))
        assert config.solver.tol == 1e-10
        assert config.solver.init == "true"
        assert config.prediction.trace_method == "auto"
        assert config.report.include_timing is False

    def test_env_default_parsed_as_number(self, config_file, monkeypatch):
        monkeypatch.delenv("SEDJOCO_TEST_THREADS", raising=False)
        config = load_config(str(config_file))
        assert config.monte_carlo.threads == 3

    def test_env_variable_substitution(self, config_file, monkeypatch):
        monkeypatch.setenv("SEDJOCO_TEST_THREADS", "5")
        monkeypatch.setenv("SEDJOCO_TEST_OUT", "/tmp/out")
        config = load_config(str(config_file))
        assert config.monte_carlo.threads == 5
        assert config.report.out_dir == "/tmp/out"

    def test_overrides(self, config_file):
        config = load_config(str(config_file), ["dims.T=500", "grid.mu=[0.25]"])
        assert config.dims.T == 500
        assert config.grid.mu == [0.25]

    def test_to_dict_round_trip(self, config_file):
        config = load_config(str(config_file))
        assert config_from_dict(config.to_dict()) == config


class TestThreadsFallback:
    def test_missing_threads_uses_environment(self, monkeypatch):
        monkeypatch.setenv("SEDJOCO_THREADS", "4")
        config = config_from_dict({"dims": {"M": 1, "K": 2, "T": 10, "L": 1}, "sources": {"eta": 1.0}})
        assert config.monte_carlo.threads == 4


class TestValidation:
    @pytest.fixture
    def raw(self):
        return {"dims": {"M": 2, "K": 2, "T": 100, "L": 2}, "sources": {"eta": 0.5}}

    @pytest.mark.parametrize(
        "override",
        [
            "sources.eta=1.5",
            "grid.mu=[1.2]",
            "grid.p=[1.0]",
            "mismodel.c=1.0",
            "solver.init=random",
            "prediction.trace_method=fast",
            "monte_carlo.mixing=orthogonal",
            "monte_carlo.trials=0",
            "sources.filter_design=poles",
        ],
    )
    def test_invalid_values_rejected(self, raw, override):
        with pytest.raises(ValueError):
            config_from_dict(apply_overrides(raw, [override]))

    def test_user_init_requires_path(self, raw):
        with pytest.raises(ValueError):
            config_from_dict(apply_overrides(raw, ["solver.init=user"]))

    def test_malformed_override(self, raw):
        with pytest.raises(ValueError):
            apply_overrides(raw, ["dims.T"])

    def test_override_does_not_mutate_input(self, raw):
        apply_overrides(raw, ["dims.T=7"])
        assert raw["dims"]["T"] == 100
