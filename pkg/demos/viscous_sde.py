"""Stochastic dynamics: a viscous HJ equation and Euler-Maruyama paths.

Adding Brownian noise sqrt(2 eps) dW to the dynamics of ``quadratic_1d.py``
adds the diffusion term -eps phi_xx to the HJ equation.  The step sizes are
derated to absorb the extra coupling.  A fixed seed reproduces a path
bit for bit; with eps -> 0 the solution approaches the deterministic one.
"""

import numpy as np

from hjpdhg.catalog import example_problem
from hjpdhg.pdhg import PdhgConfig, solve
from hjpdhg.trajectory import integrate_sde

problem = example_problem("quadratic", n_x=160, n_t=41, epsilon=0.1)
state, report = solve(problem, PdhgConfig(tol=1e-6))
print(f"eps = 0.1: converged {report.converged} after {report.outer_iterations} iterations, "
      f"step derating {report.step_sizes['derating']:.3f}")

ends = np.array([integrate_sde(state, problem, 0.5, seed=s).states[-1, 0] for s in range(200)])
print(f"200 paths from x0 = 0.5: mean end {ends.mean():.3f}, std {ends.std():.3f}, "
      f"mean terminal cost {np.sin(np.pi * ends).mean():.3f}")

a = integrate_sde(state, problem, 0.5, seed=7)
b = integrate_sde(state, problem, 0.5, seed=7)
print(f"seed 7 twice, identical: {np.array_equal(a.states, b.states)}")

inviscid, _ = solve(example_problem("quadratic", 40, 11), PdhgConfig())
for eps in (1e-1, 1e-2, 1e-3, 1e-4):
    s, _ = solve(example_problem("quadratic", 40, 11, epsilon=eps), PdhgConfig())
    print(f"40 x 11, eps = {eps:.0e}: max |phi_eps - phi_0| = "
          f"{np.max(np.abs(s.phi - inviscid.phi)):.2e}")
