from dataclasses import dataclass
from enum import Enum

import numpy as np


class NoiseFamily(Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    BERNOULLI = "bernoulli"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean unit-variance white driving noise."""

    family: NoiseFamily = NoiseFamily.GAUSSIAN

    @classmethod
    def parse(cls, name: str) -> "NoiseSpec":
        try:
            return cls(NoiseFamily(name.lower()))
        except ValueError:
            valid = ", ".join(f.value for f in NoiseFamily)
            raise ValueError(f"unknown noise family {name!r} (expected one of {valid})") from None


def gen_white(spec: NoiseSpec, n: int | tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    size = (n,) if isinstance(n, int) else tuple(n)
    if any(s < 1 for s in size):
        raise ValueError("sample count must be positive")
    match spec.family:
        case NoiseFamily.GAUSSIAN:
            return rng.standard_normal(size)
        case NoiseFamily.UNIFORM:
            return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size)
        case NoiseFamily.BERNOULLI:
            return np.where(rng.random(size) < 0.5, -1.0, 1.0)
        case NoiseFamily.LAPLACE:
            return rng.laplace(0.0, 1.0 / np.sqrt(2.0), size)
    raise ValueError(f"unsupported noise family {spec.family}")


__all__ = ["NoiseFamily", "NoiseSpec", "gen_white"]
