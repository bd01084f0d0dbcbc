"""Feedback controls and optimal trajectories from a solved state.

The control fields of the solver live on the time-reversed grid: slice
``k`` holds the feedback at physical time ``s = T - t_k``.  Feedback values
between nodes are obtained by multilinear interpolation, which keeps box
constraints intact because it forms convex combinations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import Grid
from .pdhg import SolverState
from .problem import ControlProblem


@dataclass
class TrajectoryResult:
    """Sampled path.

    Attributes
    ----------
    times : ndarray, shape (n_steps + 1,)
        Physical times ``s_j``.
    states : ndarray, shape (n_steps + 1, dims)
    controls : ndarray, shape (n_steps + 1, n_controls)
        Feedback control evaluated at ``(states[j], times[j])``.
    seed : int, optional
        Seed of the noise generator; ``None`` for deterministic paths.
    """

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    seed: Optional[int] = None


def _corners(grid: Grid, t: float, x: np.ndarray):
    """Indices and weights of the multilinear stencil around ``(t, x)``."""
    u = min(max(t / grid.dt, 0.0), grid.n_t - 1)
    k0 = min(int(np.floor(u)), grid.n_t - 2)
    axes = [((k0, k0 + 1), (1 - (u - k0), u - k0))]
    for d in range(grid.dims):
        n, h, a = grid.n_space[d], grid.dx[d], grid.domain[d][0]
        if grid.bc[d] == "periodic":
            u = np.mod((x[d] - a) / h, n)
            i0 = int(np.floor(u)) % n
            w = u - np.floor(u)
            axes.append(((i0, (i0 + 1) % n), (1 - w, w)))
        else:
            u = min(max((x[d] - a) / h, 0.0), n - 1)
            i0 = min(int(np.floor(u)), n - 2)
            axes.append(((i0, i0 + 1), (1 - (u - i0), u - i0)))
    return axes


def interpolate(values: np.ndarray, grid: Grid, t: float, x) -> float:
    """Multilinear interpolation of a grid field at HJ time ``t`` and point ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    axes = _corners(grid, t, x)
    total = 0.0
    for corner in np.ndindex(*(2,) * len(axes)):
        idx = tuple(axes[a][0][c] for a, c in enumerate(corner))
        w = np.prod([axes[a][1][c] for a, c in enumerate(corner)])
        if w:
            total += w * values[idx]
    return float(total)


def _hj_time(problem: ControlProblem, s: float) -> float:
    return problem.horizon - problem.time_offset - s


def feedback_control(state: SolverState, problem: ControlProblem, x, s: float) -> np.ndarray:
    """Feedback ``alpha(x, T - s)`` for every control-dependent dimension.

    The two branch fields of a dimension are added; at a solution at most
    one of them is nonzero at any node.
    """
    t = _hj_time(problem, s)
    if not -1e-12 <= t <= problem.grid.T + 1e-12:
        raise ValueError(f"time {s} outside the horizon")
    x = problem.grid.wrap(np.atleast_1d(np.asarray(x, dtype=float)))
    out = [
        interpolate(state.alpha_up[d] + state.alpha_down[d], problem.grid, t, x)
        for d in problem.dynamics.control_axes
    ]
    return np.array(out)


def velocity(problem: ControlProblem, x, s: float, control) -> np.ndarray:
    """``f(x, s, alpha)`` with ``control`` listing the control components."""
    A, b = problem.coefficients_at(tuple(np.atleast_1d(x)), _hj_time(problem, s))
    f = np.array([float(v) for v in b])
    for c, d in zip(control, problem.dynamics.control_axes):
        f[d] += float(A[d]) * c
    return f


def _integrate(state, problem, x0, t0, n_steps, noise):
    grid = problem.grid
    if n_steps is None:
        n_steps = 10 * (grid.n_t - 1)
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    T = problem.horizon - problem.time_offset
    h = (T - t0) / n_steps
    x = grid.wrap(np.atleast_1d(np.asarray(x0, dtype=float)))
    times = t0 + h * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, grid.dims))
    controls = np.empty((n_steps + 1, len(problem.dynamics.control_axes)))
    for j in range(n_steps + 1):
        s = times[j]
        states[j] = x
        controls[j] = feedback_control(state, problem, x, s)
        if j == n_steps:
            break
        step = x + h * velocity(problem, x, s, controls[j])
        if noise is not None:
            step = step + noise(h)
        x = grid.wrap(step)
    return times, states, controls


def integrate_ode(state: SolverState, problem: ControlProblem, x0, t0: float = 0.0,
                  n_steps: Optional[int] = None) -> TrajectoryResult:
    """Forward Euler for ``dgamma/ds = f(gamma, s, alpha(gamma, T - s))``.

    ``n_steps`` defaults to ``10 (n_t - 1)``.  Periodic coordinates wrap and
    Neumann coordinates are clamped to the domain after every step.
    """
    times, states, controls = _integrate(state, problem, x0, t0, n_steps, None)
    return TrajectoryResult(times, states, controls)


def integrate_sde(state: SolverState, problem: ControlProblem, x0, t0: float = 0.0,
                  n_steps: Optional[int] = None, seed: Optional[int] = None,
                  rng=None) -> TrajectoryResult:
    """Euler-Maruyama for ``dgamma = f ds + sqrt(2 eps) dW``.

    Parameters
    ----------
    seed : int, optional
        Seed of a fresh :func:`numpy.random.default_rng`.
    rng : optional
        Any object with a ``standard_normal(size)`` method; overrides
        ``seed``.

    Notes
    -----
    With ``eps = 0`` no random numbers are drawn and the result equals
    :func:`integrate_ode` exactly.
    """
    eps = problem.epsilon
    noise = None
    if eps > 0:
        gen = rng if rng is not None else np.random.default_rng(seed)
        dims = problem.dims

        def noise(h):
            return np.sqrt(2 * eps * h) * gen.standard_normal(dims)

    times, states, controls = _integrate(state, problem, x0, t0, n_steps, noise)
    return TrajectoryResult(times, states, controls, seed)
