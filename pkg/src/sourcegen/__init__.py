from src.sourcegen.metrics import align_permutation, empirical_isr
from src.sourcegen.noise import NoiseFamily, NoiseSpec, gen_white
from src.sourcegen.sources import (
    gaussian_tap_bank,
    gen_mixture_sources,
    gen_sources,
    mix,
    random_mixing,
)
from src.sourcegen.zeros import (
    ZeroSet,
    bank_from_zeros,
    draw_zero_bank,
    draw_zeros,
    fir_from_zeros,
    interpolate_zeros,
    perturb_zeros,
)

__all__ = [
    "ZeroSet",
    "draw_zeros",
    "draw_zero_bank",
    "perturb_zeros",
    "interpolate_zeros",
    "fir_from_zeros",
    "bank_from_zeros",
    "NoiseFamily",
    "NoiseSpec",
    "gen_white",
    "gen_sources",
    "gen_mixture_sources",
    "gaussian_tap_bank",
    "mix",
    "random_mixing",
    "empirical_isr",
    "align_permutation",
]
