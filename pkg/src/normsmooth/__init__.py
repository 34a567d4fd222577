"""Linesearch normal-map semismooth Newton method for composite problems ``min f(x) + phi(x)``."""

from .baselines import FirstOrderConfig, run_first_order
from .linesearch import LineSearchConfig
from .newton_cg import GradientTestConfig
from .normal import ProblemHandle, eval_point, init_z0, merit, natural_residual
from .prox import ProxOperator, box_l1, group_l2, l1, zero
from .smooth import SmoothObjective, logistic, quadratic, sigmoid_ls
from .solver import SolverConfig, SolveResult, solve

__version__ = "0.1.0"

__all__ = [
    "FirstOrderConfig", "GradientTestConfig", "LineSearchConfig", "ProblemHandle",
    "ProxOperator", "SmoothObjective", "SolveResult", "SolverConfig",
    "box_l1", "eval_point", "group_l2", "init_z0", "l1", "logistic", "merit",
    "natural_residual", "quadratic", "run_first_order", "sigmoid_ls", "solve", "zero",
]
