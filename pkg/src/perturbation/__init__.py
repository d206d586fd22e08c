from src.perturbation.asymptotics import (
    PhiLimits,
    asymptotic_gains,
    expected_targets,
    operating_point,
    phi_limits,
)
from src.perturbation.gradients import (
    GradientMatrix,
    closed_form_diag_gradients,
    rhs_y,
    solve_gradients,
)
from src.perturbation.isr import IsrTable, icrlb_gaussian, predict_pipeline, predicted_isr
from src.perturbation.qcov import QCovariance, q_covariance_identity
from src.perturbation.traces import ExactTraceEngine, SpectralTraceEngine, make_trace_engine

__all__ = [
    "PhiLimits",
    "expected_targets",
    "phi_limits",
    "asymptotic_gains",
    "operating_point",
    "GradientMatrix",
    "rhs_y",
    "solve_gradients",
    "closed_form_diag_gradients",
    "QCovariance",
    "q_covariance_identity",
    "IsrTable",
    "predicted_isr",
    "predict_pipeline",
    "icrlb_gaussian",
    "ExactTraceEngine",
    "SpectralTraceEngine",
    "make_trace_engine",
]
