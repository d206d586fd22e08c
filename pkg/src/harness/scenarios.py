"""Experiment grid points and the statistics each one needs."""

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from src.core.config import ExperimentConfig
from src.core.model import ProblemDims
from src.covariance.fir import FirBank
from src.covariance.scv import ScvCovariance, mixture_covariance, scv_covariance_from_firs
from src.sourcegen.noise import NoiseSpec
from src.sourcegen.sources import gaussian_tap_bank, gen_mixture_sources, gen_sources
from src.sourcegen.zeros import ZeroSet, bank_from_zeros, draw_zero_bank, interpolate_zeros, perturb_zeros

logger = logging.getLogger(__name__)

BANK_STREAM = 0
TRIAL_STREAM = 1
MIXING_STREAM = 2


@dataclass(frozen=True)
class GridPoint:
    index: int
    T: int
    mu: float
    p: float | None
    family: str

    @property
    def label(self) -> str:
        parts = [f"T={self.T}", f"mu={self.mu:g}"]
        if self.p is not None:
            parts.append(f"p={self.p:g}")
        parts.append(f"family={self.family}")
        return ",".join(parts)


def grid_points(config: ExperimentConfig) -> list[GridPoint]:
    Ts = config.grid.T or [config.dims.T]
    ps = config.grid.p or [None]
    families = config.grid.family or [config.sources.family]
    points = []
    for n, (family, p, T, mu) in enumerate(itertools.product(families, ps, Ts, config.grid.mu)):
        points.append(GridPoint(index=n, T=T, mu=mu, p=p, family=family))
    return points


@dataclass(frozen=True)
class BankDraw:
    """Seeded filter draws shared by all grid points of one run.

    One entry per mixture component (a single one without a p-grid).
    """

    true_zeros: tuple[ZeroSet, ...] = ()
    erroneous_zeros: tuple[ZeroSet, ...] = ()
    tap_banks: tuple[FirBank, ...] = ()


def draw_banks(config: ExperimentConfig) -> BankDraw:
    rng = np.random.default_rng(np.random.SeedSequence([config.monte_carlo.master_seed, BANK_STREAM]))
    d, mm = config.dims, config.mismodel
    components = 2 if config.grid.p else 1
    if config.sources.filter_design == "gaussian_taps":
        banks = tuple(gaussian_tap_bank(d.K, d.M, d.L, config.sources.eta, rng) for _ in range(components))
        return BankDraw(tap_banks=banks)
    true_zeros, erroneous = [], []
    for _ in range(components):
        z0 = draw_zero_bank(d.K, d.M, d.L, mm.a, rng)
        true_zeros.append(z0)
        erroneous.append(perturb_zeros(z0, mm.b, mm.c, rng))
    return BankDraw(true_zeros=tuple(true_zeros), erroneous_zeros=tuple(erroneous))


@dataclass(frozen=True)
class SourceModel:
    """Generates one trial's sources; plain data so it can cross process boundaries."""

    banks: tuple[FirBank, ...]
    family: str
    mixture_family: str = "gaussian"
    p: float | None = None

    def draw(self, T: int, rng: np.random.Generator) -> np.ndarray:
        spec = NoiseSpec.parse(self.family)
        if self.p is None:
            return gen_sources(self.banks[0], spec, T, rng)
        spec_b = NoiseSpec.parse(self.mixture_family)
        return gen_mixture_sources(self.banks[0], self.banks[1], self.p, spec, spec_b, T, rng)


@dataclass(frozen=True)
class Scenario:
    point: GridPoint
    dims: ProblemDims
    true_covs: tuple[ScvCovariance, ...]
    presumed_covs: tuple[ScvCovariance, ...]
    source_model: SourceModel


def _covariances(banks: tuple[FirBank, ...], T: int, p: float | None) -> tuple[ScvCovariance, ...]:
    K = banks[0].K
    covs = []
    for k in range(K):
        cov_a = scv_covariance_from_firs(banks[0], k, T)
        if p is None:
            covs.append(cov_a)
        else:
            covs.append(mixture_covariance(cov_a, scv_covariance_from_firs(banks[1], k, T), p))
    return tuple(covs)


def build_scenario(config: ExperimentConfig, draw: BankDraw, point: GridPoint) -> Scenario:
    eta = config.sources.eta
    if draw.tap_banks:
        if point.mu != 0.0:
            raise ValueError("gaussian_taps filter design supports only mu = 0")
        true_banks = presumed_banks = draw.tap_banks
    else:
        true_banks = tuple(bank_from_zeros(z0, eta) for z0 in draw.true_zeros)
        presumed_banks = tuple(
            bank_from_zeros(interpolate_zeros(z0, z1, point.mu), eta)
            for z0, z1 in zip(draw.true_zeros, draw.erroneous_zeros, strict=True)
        )
    d = config.dims
    return Scenario(
        point=point,
        dims=ProblemDims(M=d.M, K=d.K, T=point.T, L=d.L),
        true_covs=_covariances(true_banks, point.T, point.p),
        presumed_covs=_covariances(presumed_banks, point.T, point.p),
        source_model=SourceModel(
            banks=true_banks,
            family=point.family,
            mixture_family=config.sources.mixture_family,
            p=point.p,
        ),
    )


__all__ = [
    "GridPoint",
    "BankDraw",
    "SourceModel",
    "Scenario",
    "grid_points",
    "draw_banks",
    "build_scenario",
    "BANK_STREAM",
    "TRIAL_STREAM",
    "MIXING_STREAM",
]
