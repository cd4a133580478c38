"""Variational (minimizing-movement) solver for degenerate parabolic systems.

Solves ``d/dt b(u) - u_xx = f`` on a 1D interval with homogeneous Dirichlet
data, where ``b = grad(phi)`` is a radial isotherm of Freundlich type.  Each
implicit time step is the unique minimizer of a strictly convex discrete
energy.
"""

from minmove.analytic import ZKBProfile
from minmove.energy import DiscreteEnergy, StateField
from minmove.errors import (
    ConfigurationError,
    DomainError,
    NonConvergence,
    NonFiniteEnergy,
    UnsupportedOperation,
)
from minmove.isotherm import FreundlichIsotherm, PMEIsotherm
from minmove.mesh import Grid1D, TimePartition, build_grid, trapezoid_integral
from minmove.minimizer import SolveReport, SolverConfig, minimize
from minmove.stepper import ProblemSpec, Trajectory, query, run

__all__ = [
    "ConfigurationError",
    "DiscreteEnergy",
    "DomainError",
    "FreundlichIsotherm",
    "Grid1D",
    "NonConvergence",
    "NonFiniteEnergy",
    "PMEIsotherm",
    "ProblemSpec",
    "SolveReport",
    "SolverConfig",
    "StateField",
    "TimePartition",
    "Trajectory",
    "UnsupportedOperation",
    "ZKBProfile",
    "build_grid",
    "minimize",
    "query",
    "run",
    "trapezoid_integral",
]

__version__ = "0.1.0"
