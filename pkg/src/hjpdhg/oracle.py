"""Reference computations for validating the PDHG solver.

``explicit_solve`` marches the same upwind numerical Hamiltonian with
forward Euler under a CFL restriction, ``prox_bruteforce`` minimizes the
branch objective of the control update by exhaustive search, and
``compare`` measures the distance between two grid fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import _shift
from .problem import ControlProblem, branch_interval, numerical_hamiltonian_from_coefficients


@dataclass
class ComparisonReport:
    """Distance between two fields.

    ``l2`` is the root-mean-square difference, i.e. the L2 norm with
    uniform cell weights normalized to unit total volume.
    """

    l_inf: float
    l2: float
    worst_time_index: int


def compare(a: np.ndarray, b: np.ndarray) -> ComparisonReport:
    """L-infinity and normalized L2 distance of two fields on one grid."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    diff = np.abs(a - b)
    per_slice = diff.reshape(diff.shape[0], -1).max(axis=1)
    return ComparisonReport(
        float(diff.max()), float(np.sqrt(np.mean(diff**2))), int(np.argmax(per_slice))
    )


def _slopes(phi, problem):
    grid = problem.grid
    up, down = [], []
    for d in range(grid.dims):
        periodic = grid.bc[d] == "periodic"
        h = grid.dx[d]
        up.append((_shift(phi, d, 1, periodic) - phi) / h)
        down.append((phi - _shift(phi, d, -1, periodic)) / h)
    return up, down


def _speed(problem, A, b, up, down, samples: int = 9) -> float:
    """Sup over the grid of the upwind speed ``sum |dH_hat / dp|``.

    Derivatives are central differences of the numerical Hamiltonian at
    ``samples`` slopes spanning the range of the current iterate.  Each
    dimension is weighted by ``min(dx) / dx_d`` so that the CFL step is
    ``cfl * min(dx) / speed``.
    """
    grid = problem.grid
    lag = problem.lagrangian
    p_max = max(float(np.max(np.abs(v))) for v in up + down) + 1e-12
    eta = 1e-6 * max(1.0, p_max)
    hmin = min(grid.dx)
    zero = [np.zeros_like(A_d if A_d is not None else b_d) for A_d, b_d in zip(A, b)]
    total = 0.0
    for d in range(grid.dims):
        best = 0.0
        for p in np.linspace(-p_max, p_max, samples):
            for slot in (0, 1):
                hi = [list(zero), list(zero)]
                lo = [list(zero), list(zero)]
                hi[slot][d] = zero[d] + p + eta
                lo[slot][d] = zero[d] + p - eta
                dh = (
                    numerical_hamiltonian_from_coefficients(lag, A, b, *hi)
                    - numerical_hamiltonian_from_coefficients(lag, A, b, *lo)
                ) / (2 * eta)
                best = np.maximum(best, np.abs(dh))
        total = total + 2 * best * hmin / grid.dx[d]
    return 1.2 * float(np.max(total))


def explicit_solve(problem: ControlProblem, cfl_factor: float = 0.9,
                   substeps: bool = True) -> np.ndarray:
    """Forward-Euler upwind scheme ``phi <- phi - dt H_hat(D^+ phi, D^- phi)``.

    Parameters
    ----------
    problem : ControlProblem
        First-order problem (``epsilon == 0``).
    cfl_factor : float
        Fraction of the CFL-limited step used for the internal sub-steps.
    substeps : bool
        If False, take one step per grid interval regardless of stability.

    Returns
    -------
    ndarray
        Values on every slice of ``problem.grid``.
    """
    if problem.epsilon > 0:
        raise ValueError("the explicit oracle handles first-order problems only")
    if not 0 < cfl_factor <= 1:
        raise ValueError("cfl_factor must lie in (0, 1]")
    grid = problem.grid
    x = grid.mesh()
    lag = problem.lagrangian
    out = np.empty(grid.shape)
    phi = problem.terminal_values.copy()
    out[0] = phi
    hmin = min(grid.dx)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(grid.n_t - 1):
            t = grid.times[k]
            n_sub = 1
            if substeps:
                A, b = problem.coefficients_at(x, t)
                up, down = _slopes(phi, problem)
                speed = _speed(problem, A, b, up, down)
                if speed > 0:
                    n_sub = max(1, math.ceil(grid.dt * speed / (cfl_factor * hmin)))
            dt = grid.dt / n_sub
            for j in range(n_sub):
                A, b = problem.coefficients_at(x, t + j * dt)
                up, down = _slopes(phi, problem)
                phi = phi - dt * numerical_hamiltonian_from_coefficients(lag, A, b, up, down)
            out[k + 1] = phi
    return out


def prox_bruteforce(problem: ControlProblem, x, t, grad_sample, rho, alpha_prev,
                    tau_alpha: float, branch: str, axis: Optional[int] = None,
                    step: float = 1e-4, bound: float = 10.0) -> float:
    """Minimize the branch objective of the control update on a dense grid.

    The objective ``a alpha p + L(alpha) + rho/(2 tau)(alpha - alpha_prev)^2``
    is evaluated at multiples of ``step`` in ``[-bound, bound]`` intersected
    with the branch set.
    """
    if axis is None:
        axis = problem.dynamics.control_axes[0]
    pt = (x,) if np.ndim(x) == 0 else tuple(x)
    A, _ = problem.coefficients_at(pt, t)
    a = float(A[axis])
    lo, hi = branch_interval(problem.lagrangian, a, branch)
    lo, hi = max(float(lo), -bound), min(float(hi), bound)
    alpha = np.arange(math.ceil(lo / step - 1e-9), math.floor(hi / step + 1e-9) + 1) * step
    alpha = np.clip(alpha, lo, hi)
    obj = a * alpha * grad_sample + rho / (2 * tau_alpha) * (alpha - alpha_prev) ** 2
    if problem.lagrangian.kind == "quadratic":
        obj = obj + 0.5 * problem.lagrangian.weight * alpha**2
    return float(alpha[np.argmin(obj)])
