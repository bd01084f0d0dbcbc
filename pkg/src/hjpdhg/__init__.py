"""Hamilton-Jacobi equations and optimal control by primal-dual hybrid gradient.

The solver treats the implicit upwind discretization of a (possibly
viscous) HJ equation as a saddle problem and iterates PDHG with a spectral
``(I - D_tt - Lap)^{-1}`` preconditioner.  Optimal trajectories follow from
the control fields of the solution.
"""

__version__ = "0.1.0"

from .grid import Grid, diff_space, diff_time
from .pdhg import (
    PdhgConfig,
    SolveReport,
    SolverState,
    estimate_stepsize_bound,
    init_state,
    optimality_residuals,
    solve,
    solve_windowed,
)
from .problem import AffineDynamics, ControlProblem, Lagrangian
from .trajectory import TrajectoryResult, feedback_control, integrate_ode, integrate_sde

__all__ = [
    "AffineDynamics",
    "ControlProblem",
    "Grid",
    "Lagrangian",
    "PdhgConfig",
    "SolveReport",
    "SolverState",
    "TrajectoryResult",
    "diff_space",
    "diff_time",
    "estimate_stepsize_bound",
    "feedback_control",
    "init_state",
    "integrate_ode",
    "integrate_sde",
    "optimality_residuals",
    "solve",
    "solve_windowed",
]
