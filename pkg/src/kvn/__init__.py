"""Friedrichs, Krein-von Neumann and vertex-parametrized Laplacians on graphs,
metric graphs and the unit interval, with spectral and semigroup checks."""
from .errors import (ConvergenceError, DegenerateDifference, InvalidParams, KernelMismatch,
                     KvnError, NegativeTime, NotPositiveDefinite, NotStrictlyPositive,
                     ParseError, RankDeficient, RootBracketFailure, SolverError,
                     TolTooCoarse, ValidationError)
from .graph import WeightedOrientedGraph, discrete_laplacian, incidence, load_graph
from .linalg import gen_sym_eig, null_space, pencil_spectrum, sym_eig, sym_exp

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "DegenerateDifference", "InvalidParams", "KernelMismatch",
    "KvnError", "NegativeTime", "NotPositiveDefinite", "NotStrictlyPositive", "ParseError",
    "RankDeficient", "RootBracketFailure", "SolverError", "TolTooCoarse", "ValidationError",
    "WeightedOrientedGraph", "discrete_laplacian", "incidence", "load_graph",
    "gen_sym_eig", "null_space", "pencil_spectrum", "sym_eig", "sym_exp", "__version__",
]
