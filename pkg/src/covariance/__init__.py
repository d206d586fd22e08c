from src.covariance.fir import FirBank, fir_cross_correlation
from src.covariance.scv import (
    BandedPrecision,
    ScvCovariance,
    ScvPrecision,
    mixture_covariance,
    scv_covariance_from_firs,
    scv_precision,
)

__all__ = [
    "FirBank",
    "fir_cross_correlation",
    "ScvCovariance",
    "ScvPrecision",
    "BandedPrecision",
    "scv_covariance_from_firs",
    "scv_precision",
    "mixture_covariance",
]
