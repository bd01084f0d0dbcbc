"""Newton's law with a controlled acceleration.

State (x_1, x_2) = (velocity, position) with dx_1/ds = alpha and
dx_2/ds = x_1, so only the first dimension carries a control and the second
is pure drift.  The terminal cost exp(-x_1^2 / 2) sin(pi x_2) rewards
arriving near x_2 = -1/2 with a large speed.  The velocity axis uses
Neumann boundaries, the position axis is periodic.
"""

import numpy as np

from hjpdhg.catalog import example_problem
from hjpdhg.pdhg import PdhgConfig, estimate_stepsize_bound, solve
from hjpdhg.trajectory import integrate_ode

problem = example_problem("newton", n_x=40, n_y=20, n_t=11)
print(f"operator-norm bound B = {estimate_stepsize_bound(problem):.2f}")
state, report = solve(problem, PdhgConfig(tol=1e-6))
print(f"converged: {report.converged} after {report.outer_iterations} iterations "
      f"({report.wall_time:.1f} s)")

g = problem.terminal_values
print("\n  start (v, x)      end (v, x)       g(end)")
for v0 in (-1.0, 0.0, 1.0):
    for x0 in (-0.5, 0.5):
        path = integrate_ode(state, problem, (v0, x0))
        v, x = path.states[-1]
        cost = np.exp(-v**2 / 2) * np.sin(np.pi * x)
        print(f"({v0:5.2f}, {x0:5.2f})   ({v:6.3f}, {x:6.3f})   {cost:7.4f}")
