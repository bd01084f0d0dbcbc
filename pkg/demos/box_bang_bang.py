"""Bounded controls produce bang-bang feedback.

Same dynamics and terminal cost as ``quadratic_1d.py``, but the running cost
is replaced by the hard constraint |alpha| <= 1.  The Hamiltonian is then
1-homogeneous in the gradient and optimal controls sit at -1, 0 or 1.

With a horizon T = 4 every starting point has time to reach the minimizer
x = 1.5 of sin(pi x) and stays there.  The box problem converges slowly
(there is no strong convexity in alpha), so we run a fixed iteration budget.
"""

import numpy as np

from hjpdhg.catalog import example_problem
from hjpdhg.pdhg import PdhgConfig, solve
from hjpdhg.trajectory import integrate_ode

coarse = example_problem("box", n_x=40, n_t=11, T=1.0)
state, report = solve(coarse, PdhgConfig(max_outer=400_000))
values = np.concatenate([state.alpha_up[0].ravel(), state.alpha_down[0].ravel()])
near = np.min(np.abs(values[:, None] - np.array([-1.0, 0.0, 1.0])), axis=1) <= 1e-2
print(f"40 x 11, T = 1: converged {report.converged} after {report.outer_iterations} iterations")
print(f"  {100 * near.mean():.1f}% of control values within 1e-2 of -1, 0 or 1")

problem = example_problem("box", n_x=160, n_t=41, T=4.0)
state, report = solve(problem, PdhgConfig(max_outer=60_000))
print(f"\n160 x 41, T = 4: {report.outer_iterations} iterations, "
      f"final residuals {', '.join(f'{v:.1e}' for v in report.final_residuals)}")

print("\n   x0   gamma(T)   reached 1.5 at s")
for x0 in np.linspace(0.0, 2.0, 8, endpoint=False):
    path = integrate_ode(state, problem, x0)
    hit = np.flatnonzero(np.abs(path.states[:, 0] - 1.5) <= problem.grid.dx[0])
    when = f"{path.times[hit[0]]:.2f}" if hit.size else "-"
    print(f"{x0:5.2f}   {path.states[-1, 0]:7.4f}   {when:>8}")
