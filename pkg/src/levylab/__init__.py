"""levylab: a numerical laboratory for pseudo-differential operators of
Lévy type — symbols, nonlocal operators, heat kernels, critical parabolic
solvers, and stable-process Monte Carlo."""

from . import (acceptance, errors, fieldgrid, heatkernel, levy,
               linear_solver, nonlocal_op, quasilinear, stochastic)
from .errors import LevylabError
from .fieldgrid import Grid, GridField, SpaceTimeField
from .heatkernel import DriftSchedule
from .levy import (DensityKernel, DirectSumAxes, SphericalMeasure,
                   StableSpectral)
from .linear_solver import LinearProblem, SolverConfig
from .nonlocal_op import OperatorRoute
from .quasilinear import Hamiltonian, QuasilinearProblem
from .stochastic import PathEnsemble

__version__ = "0.1.0"

__all__ = [
    "DensityKernel", "DirectSumAxes", "DriftSchedule", "Grid", "GridField",
    "Hamiltonian", "LevylabError", "LinearProblem", "OperatorRoute",
    "PathEnsemble", "QuasilinearProblem", "SolverConfig", "SpaceTimeField",
    "SphericalMeasure", "StableSpectral", "acceptance", "errors",
    "fieldgrid", "heatkernel", "levy", "linear_solver", "nonlocal_op",
    "quasilinear", "stochastic",
]
