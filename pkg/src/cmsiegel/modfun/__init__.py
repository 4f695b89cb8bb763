"""Numerical modular-function kernels, the generator catalog and modularity checks."""

from .ball import Ball
from .catalog import available, get, siegel_exponent
from .expr import FunctionExpr, Value, evaluate, evaluate_ball
from .kernels import ThetaChar, siegel_value, theta_value
from .modularity import ModularityReport, verify_modularity
from .precision import Precision
from .space import act, reduce_point

__all__ = [
    "Ball", "FunctionExpr", "ModularityReport", "Precision", "ThetaChar", "Value", "act",
    "available", "evaluate", "evaluate_ball", "get", "reduce_point", "siegel_exponent",
    "siegel_value", "theta_value", "verify_modularity",
]
