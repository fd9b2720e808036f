"""Calculus on Cantor-like fractal subsets of the real line.

Functions on a fractal F are handled through the staircase coordinate
s = S(t): a function f(t) = g(S(t)) has fractal derivative g'(S(t)) on F.
"""

from .errors import FractalcError
from .fractal_ops import FnOfS, ResidualReport, fractal_derivative, fractal_integral, residual_check
from .fractal_set import FractalSet, make_set, set_from_alpha
from .nde_solvers import FdeProblem, FdeSolution, Kind
from .presets import PRESETS, get_preset, solve_preset
from .staircase import Staircase, gamma, make_staircase, staircase_eval

__all__ = [
    "FdeProblem",
    "FdeSolution",
    "FnOfS",
    "FractalSet",
    "FractalcError",
    "Kind",
    "PRESETS",
    "ResidualReport",
    "Staircase",
    "fractal_derivative",
    "fractal_integral",
    "gamma",
    "get_preset",
    "make_set",
    "make_staircase",
    "residual_check",
    "set_from_alpha",
    "solve_preset",
    "staircase_eval",
]
