import copy
import os
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml
from dotenv import load_dotenv

# Load .env file before processing config
load_dotenv()

THREADS_ENV = "SEDJOCO_THREADS"
INIT_POLICIES = ("true", "identity", "user")
FILTER_DESIGNS = ("zeros", "gaussian_taps")
MIXING_KINDS = ("identity", "random")


@dataclass
class DimsConfig:
    M: int
    K: int
    T: int
    L: int


@dataclass
class SourcesConfig:
    eta: float
    filter_design: str = "zeros"
    family: str = "gaussian"
    mixture_family: str = "gaussian"


@dataclass
class MismodelConfig:
    a: float = 2.0
    b: float = 0.1
    c: float = 0.1


@dataclass
class GridConfig:
    mu: list[float] = field(default_factory=lambda: [0.0])
    T: list[int] = field(default_factory=list)
    p: list[float] = field(default_factory=list)
    family: list[str] = field(default_factory=list)


@dataclass
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 50
    init: str = "true"
    init_path: str | None = None


@dataclass
class PredictionConfig:
    trace_method: str = "auto"
    exact_limit: int = 2048
    cache_mb: float = 1024.0
    spectral_grid: int = 4096


@dataclass
class MonteCarloConfig:
    trials: int = 100
    master_seed: int = 12345
    threads: int = 1
    mixing: str = "identity"
    resolve_permutation: bool = False
    excluded_budget: float = 0.01


@dataclass
class ReportConfig:
    include_timing: bool = False
    emit_plots: bool = False
    out_dir: str = "results"


@dataclass
class ExperimentConfig:
    id: str
    dims: DimsConfig
    sources: SourcesConfig
    mismodel: MismodelConfig
    grid: GridConfig
    solver: SolverConfig
    prediction: PredictionConfig
    monte_carlo: MonteCarloConfig
    report: ReportConfig

    def to_dict(self) -> dict:
        return asdict(self)


def _substitute_env_vars(value: str) -> str:
    pattern = r"\$\{([^}]+)\}"

    def replace(match):
        name, _, default = match.group(1).partition(":-")
        return os.environ.get(name, default if default else match.group(0))

    return re.sub(pattern, replace, value)


def _process_config_values(data: dict) -> dict:
    result = {}
    for key, value in data.items():
        if isinstance(value, dict):
            result[key] = _process_config_values(value)
        elif isinstance(value, str):
            substituted = _substitute_env_vars(value)
            # placeholders may resolve to numbers
            result[key] = yaml.safe_load(substituted) if substituted != value else value
        else:
            result[key] = value
    return result


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply dotted key=value overrides, values parsed as YAML scalars or lists."""
    result = copy.deepcopy(data)
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ValueError(f"override must look like section.key=value, got {item!r}")
        node = result
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"override {key!r} descends into a non-section")
        node[parts[-1]] = yaml.safe_load(raw)
    return result


def _validate(config: ExperimentConfig) -> None:
    d = config.dims
    if min(d.M, d.K, d.T, d.L) < 1:
        raise ValueError("dims.M, dims.K, dims.T and dims.L must be positive")
    if not 0.0 <= config.sources.eta <= 1.0:
        raise ValueError("sources.eta must lie in [0, 1]")
    if config.sources.filter_design not in FILTER_DESIGNS:
        raise ValueError(f"sources.filter_design must be one of {FILTER_DESIGNS}")
    mm = config.mismodel
    if mm.a <= 0 or mm.b < 0 or not 0.0 <= mm.c < 1.0:
        raise ValueError("mismodel requires a > 0, b >= 0 and 0 <= c < 1")
    g = config.grid
    if not g.mu:
        raise ValueError("grid.mu must not be empty")
    if any(not 0.0 <= mu <= 1.0 for mu in g.mu):
        raise ValueError("grid.mu values must lie in [0, 1]")
    if any(T < 1 for T in g.T):
        raise ValueError("grid.T values must be positive")
    if any(not 0.0 < p < 1.0 for p in g.p):
        raise ValueError("grid.p values must lie in (0, 1)")
    s = config.solver
    if s.tol <= 0 or s.max_iter < 1:
        raise ValueError("solver.tol must be positive and solver.max_iter at least 1")
    if s.init not in INIT_POLICIES:
        raise ValueError(f"solver.init must be one of {INIT_POLICIES}")
    if s.init == "user" and not s.init_path:
        raise ValueError("solver.init_path is required with solver.init=user")
    if config.prediction.trace_method not in ("auto", "exact", "spectral"):
        raise ValueError("prediction.trace_method must be auto, exact or spectral")
    mc = config.monte_carlo
    if mc.trials < 1 or mc.threads < 1:
        raise ValueError("monte_carlo.trials and monte_carlo.threads must be at least 1")
    if mc.mixing not in MIXING_KINDS:
        raise ValueError(f"monte_carlo.mixing must be one of {MIXING_KINDS}")
    if not 0.0 <= mc.excluded_budget <= 1.0:
        raise ValueError("monte_carlo.excluded_budget must lie in [0, 1]")


def config_from_dict(raw_config: dict) -> ExperimentConfig:
    config_data = _process_config_values(raw_config)
    monte_carlo = dict(config_data.get("monte_carlo", {}))
    if monte_carlo.get("threads") in (None, ""):
        monte_carlo["threads"] = int(os.environ.get(THREADS_ENV, "1"))

    config = ExperimentConfig(
        id=str(config_data.get("id", "custom")),
        dims=DimsConfig(**config_data["dims"]),
        sources=SourcesConfig(**config_data["sources"]),
        mismodel=MismodelConfig(**config_data.get("mismodel", {})),
        grid=GridConfig(**config_data.get("grid", {})),
        solver=SolverConfig(**config_data.get("solver", {})),
        prediction=PredictionConfig(**config_data.get("prediction", {})),
        monte_carlo=MonteCarloConfig(**monte_carlo),
        report=ReportConfig(**config_data.get("report", {})),
    )
    _validate(config)
    return config


def load_raw(config_path: str | Path) -> dict:
    with open(config_path, encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def load_config(
    config_path: str | Path = "config/settings.yaml", overrides: list[str] | None = None
) -> ExperimentConfig:
    raw_config = load_raw(config_path)
    if overrides:
        raw_config = apply_overrides(raw_config, overrides)
    return config_from_dict(raw_config)


__all__ = [
    "THREADS_ENV",
    "DimsConfig",
    "SourcesConfig",
    "MismodelConfig",
    "GridConfig",
    "SolverConfig",
    "PredictionConfig",
    "MonteCarloConfig",
    "ReportConfig",
    "ExperimentConfig",
    "apply_overrides",
    "config_from_dict",
    "load_raw",
    "load_config",
]
