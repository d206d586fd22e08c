from src.sedjoco.equations import JacobianH, ResidualF, drilled_check, jacobian, residual
from src.sedjoco.newton import ConvergenceReport, newton_solve
from src.sedjoco.targets import PrecisionOperator, compute_targets

__all__ = [
    "PrecisionOperator",
    "compute_targets",
    "ResidualF",
    "JacobianH",
    "residual",
    "jacobian",
    "drilled_check",
    "ConvergenceReport",
    "newton_solve",
]
