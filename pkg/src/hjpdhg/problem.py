"""Optimal control problems with affine dynamics and their Hamiltonians.

The state equation is ``dx_d/ds = A_d(x, s) alpha_d + b_d(x, s)`` with one
control component per control-dependent dimension.  Drift-only dimensions
carry ``A_d = None`` and are advected by ``b_d`` alone.

The value function is handled in reversed time: the HJ time ``t`` of a
grid slice corresponds to the physical time ``s = T - t``, and every
coefficient is evaluated at ``s``.

Two running costs are supported, both separable across control components:
``L = (w/2)|alpha|^2`` and the indicator of ``{|alpha|_inf <= r}``.  Each
upwind branch of the numerical Hamiltonian and each proximal step then
reduces to a scalar problem with a closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.stats import qmc

from .grid import Grid

Coefficient = Callable[[tuple, float], np.ndarray]
BRANCHES = ("up", "down")
RHO_FLOOR = 1e-6


@dataclass(frozen=True)
class Lagrangian:
    """Running cost ``L(alpha)``.

    Parameters
    ----------
    kind : {"quadratic", "box_indicator"}
    weight : float
        ``w`` in ``L = (w/2)|alpha|^2``.
    radius : float
        ``r`` in the box constraint ``|alpha_d| <= r``.
    """

    kind: str = "quadratic"
    weight: float = 1.0
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in ("quadratic", "box_indicator"):
            raise ValueError(f"unknown Lagrangian kind {self.kind!r}")
        if not (self.weight > 0 and self.radius > 0):
            raise ValueError("weight and radius must be positive")

    def __call__(self, alpha) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        if self.kind == "quadratic":
            return 0.5 * self.weight * alpha**2
        return np.where(np.abs(alpha) <= self.radius, 0.0, np.inf)


@dataclass(frozen=True)
class AffineDynamics:
    """Per-dimension coefficients of ``f_d = A_d alpha_d + b_d``.

    Each entry is a callable ``fn(x, s)`` where ``x`` is a tuple of
    coordinate arrays (one per spatial dimension) and ``s`` the physical
    time, or ``None``.  ``coeff[d] is None`` marks a drift-only dimension and
    ``drift[d] is None`` means ``b_d = 0``.
    """

    coeff: tuple[Optional[Coefficient], ...]
    drift: tuple[Optional[Coefficient], ...]

    def __post_init__(self):
        object.__setattr__(self, "coeff", tuple(self.coeff))
        object.__setattr__(self, "drift", tuple(self.drift))
        if len(self.coeff) != len(self.drift):
            raise ValueError("coeff and drift need one entry per dimension")

    @property
    def dims(self) -> int:
        return len(self.coeff)

    def control_dependent(self, d: int) -> bool:
        return self.coeff[d] is not None

    @property
    def control_axes(self) -> tuple[int, ...]:
        return tuple(d for d in range(self.dims) if self.coeff[d] is not None)


def _evaluate(fn: Optional[Coefficient], x: tuple, s) -> np.ndarray:
    shape = np.broadcast(*x, np.asarray(s)).shape
    if fn is None:
        return np.zeros(shape)
    return np.broadcast_to(np.asarray(fn(x, s), dtype=float), shape)


@dataclass(frozen=True)
class ControlProblem:
    """Discretized optimal control problem.

    Parameters
    ----------
    grid : Grid
    dynamics : AffineDynamics
    lagrangian : Lagrangian
    terminal_cost : callable or ndarray
        ``g(x)`` taking a tuple of coordinate arrays, or its values on the
        spatial grid.
    epsilon : float
        Diffusion coefficient; ``0`` gives the first-order equation.
    time_offset : float
        HJ time of the first slice of ``grid``.  Nonzero only for the
        sub-problems of a windowed solve.
    horizon : float, optional
        Physical horizon; defaults to ``time_offset + grid.T``.

    Notes
    -----
    A control-dependent dimension must not also carry a drift: with
    ``b_d != 0`` the upwind split of ``A_d alpha_d + b_d`` no longer reduces
    to sign constraints on ``alpha_d``.
    """

    grid: Grid
    dynamics: AffineDynamics
    lagrangian: Lagrangian
    terminal_cost: Union[Callable, np.ndarray]
    epsilon: float = 0.0
    time_offset: float = 0.0
    horizon: Optional[float] = None

    def __post_init__(self):
        if self.dynamics.dims != self.grid.dims:
            raise ValueError("dynamics and grid dimensions differ")
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be nonnegative")
        if self.horizon is None:
            object.__setattr__(self, "horizon", self.time_offset + self.grid.T)
        for d in self.dynamics.control_axes:
            if self.dynamics.drift[d] is not None:
                raise ValueError(
                    f"dimension {d} is control dependent and must have zero drift"
                )
        if not self.dynamics.control_axes:
            raise ValueError("at least one dimension must be control dependent")
        values = self.terminal_values
        if not np.all(np.isfinite(values)):
            raise ValueError("terminal cost must be finite on the grid")

    @property
    def dims(self) -> int:
        return self.grid.dims

    def physical_time(self, t):
        """Physical time of HJ time ``t`` (local to this grid)."""
        return self.horizon - self.time_offset - np.asarray(t, dtype=float)

    @cached_property
    def terminal_values(self) -> np.ndarray:
        g = self.terminal_cost
        if callable(g):
            x = self.grid.mesh()
            return np.broadcast_to(np.asarray(g(x), dtype=float), self.grid.n_space).copy()
        g = np.asarray(g, dtype=float)
        if g.shape != self.grid.n_space:
            raise ValueError("terminal values do not match the spatial grid")
        return g.copy()

    def coefficients_at(self, x: Sequence, t) -> tuple[list, list]:
        """Return ``(A, b)`` lists at points ``x`` and HJ time ``t``.

        Entries of ``A`` are ``None`` for drift-only dimensions.
        """
        x = tuple(np.asarray(xi, dtype=float) for xi in x)
        s = self.physical_time(t)
        A = [None if fn is None else _evaluate(fn, x, s) for fn in self.dynamics.coeff]
        b = [_evaluate(fn, x, s) for fn in self.dynamics.drift]
        return A, b

    @cached_property
    def grid_coefficients(self) -> tuple[list, list]:
        """Coefficients on every grid node, arrays of shape ``grid.shape``."""
        grid = self.grid
        x = tuple(xi[None] for xi in grid.mesh())
        t = grid.times.reshape((-1,) + (1,) * grid.dims)
        A, b = self.coefficients_at(x, t)
        A = [None if a is None else np.ascontiguousarray(np.broadcast_to(a, grid.shape)) for a in A]
        b = [np.ascontiguousarray(np.broadcast_to(v, grid.shape)) for v in b]
        return A, b

    def restrict(self, k0: int, k1: int, initial: np.ndarray) -> "ControlProblem":
        """Sub-problem on time slices ``k0..k1`` starting from ``initial``."""
        grid = self.grid
        sub = grid.with_time(k1 - k0 + 1, (k1 - k0) * grid.dt)
        return ControlProblem(
            sub,
            self.dynamics,
            self.lagrangian,
            np.asarray(initial, dtype=float),
            self.epsilon,
            time_offset=self.time_offset + k0 * grid.dt,
            horizon=self.horizon,
        )


# --- scalar building blocks (vectorized over arrays) -------------------------


def branch_interval(lagrangian: Lagrangian, a, branch: str):
    """Bounds of ``{alpha : a*alpha >= 0}`` (up) or ``{a*alpha <= 0}`` (down).

    Intersected with ``[-r, r]`` for the box constraint.
    """
    a = np.asarray(a, dtype=float)
    if branch not in BRANCHES:
        raise ValueError(f"unknown branch {branch!r}")
    sign = np.sign(a) if branch == "up" else -np.sign(a)
    lo = np.where(sign > 0, 0.0, -np.inf)
    hi = np.where(sign < 0, 0.0, np.inf)
    if lagrangian.kind == "box_indicator":
        lo = np.maximum(lo, -lagrangian.radius)
        hi = np.minimum(hi, lagrangian.radius)
    return lo, hi


def branch_hamiltonian(lagrangian: Lagrangian, a, p, branch: str) -> np.ndarray:
    """``sup`` of ``-(a alpha)_{+/-} p - L(alpha)`` over one upwind branch."""
    a = np.asarray(a, dtype=float)
    p = np.asarray(p, dtype=float)
    active = np.minimum(p, 0.0) if branch == "up" else np.maximum(p, 0.0)
    if lagrangian.kind == "quadratic":
        return a**2 * active**2 / (2 * lagrangian.weight)
    return lagrangian.radius * np.abs(a) * np.abs(active)


def drift_hamiltonian(b, p_up, p_down) -> np.ndarray:
    """Upwind advection term ``-b_+ p_up - b_- p_down`` of a drift."""
    b = np.asarray(b, dtype=float)
    return -np.maximum(b, 0.0) * p_up - np.minimum(b, 0.0) * p_down


def hamiltonian_from_coefficients(lagrangian, A, b, p) -> np.ndarray:
    """``H = sum_d [-b_d p_d + h(A_d p_d)]`` from coefficient arrays."""
    total = 0.0
    for a_d, b_d, p_d in zip(A, b, p):
        p_d = np.asarray(p_d, dtype=float)
        total = total - b_d * p_d
        if a_d is not None:
            if lagrangian.kind == "quadratic":
                total = total + (a_d * p_d) ** 2 / (2 * lagrangian.weight)
            else:
                total = total + lagrangian.radius * np.abs(a_d * p_d)
    return np.asarray(total, dtype=float)


def numerical_hamiltonian_from_coefficients(lagrangian, A, b, p_up, p_down) -> np.ndarray:
    """Upwind numerical Hamiltonian from coefficient arrays."""
    total = 0.0
    for a_d, b_d, pu, pd in zip(A, b, p_up, p_down):
        if a_d is None:
            total = total + drift_hamiltonian(b_d, pu, pd)
        else:
            total = (
                total
                + branch_hamiltonian(lagrangian, a_d, pu, "up")
                + branch_hamiltonian(lagrangian, a_d, pd, "down")
            )
    return np.asarray(total, dtype=float)


def prox_branch(
    lagrangian: Lagrangian,
    a,
    p,
    rho,
    alpha_prev,
    tau_alpha: float,
    branch: str,
    rho_floor: float = RHO_FLOOR,
    bounds: Optional[tuple] = None,
) -> np.ndarray:
    """Minimize ``a alpha p + L(alpha) + rho/(2 tau) (alpha - alpha_prev)^2``
    over the branch set.

    ``bounds`` may pass precomputed :func:`branch_interval` output.
    """
    if not tau_alpha > 0:
        raise ValueError("tau_alpha must be positive")
    rho = np.maximum(np.asarray(rho, dtype=float), rho_floor)
    a = np.asarray(a, dtype=float)
    lo, hi = bounds if bounds is not None else branch_interval(lagrangian, a, branch)
    if lagrangian.kind == "quadratic":
        v = (rho * alpha_prev - tau_alpha * a * p) / (rho + tau_alpha * lagrangian.weight)
    else:
        v = alpha_prev - (tau_alpha / rho) * a * p
    return np.clip(v, lo, hi)


def branch_residual(lagrangian: Lagrangian, a, p, alpha, branch: str) -> np.ndarray:
    """Stationarity defect of ``alpha`` for the branch problem ``min a alpha p + L``.

    For the quadratic cost this is the distance to the unique minimizer.  For
    the box the minimizer jumps between interval endpoints as ``a p``
    changes sign, so the projected-gradient residual
    ``|alpha - P(alpha - a p)|`` is used instead; it vanishes exactly on the
    set of minimizers.
    """
    a = np.asarray(a, dtype=float)
    lo, hi = branch_interval(lagrangian, a, branch)
    if lagrangian.kind == "quadratic":
        target = np.clip(-a * p / lagrangian.weight, lo, hi)
    else:
        target = np.clip(alpha - a * p, lo, hi)
    return np.abs(alpha - target)


# --- point-wise API on a problem ---------------------------------------------


def _point(problem: ControlProblem, x) -> tuple:
    if problem.dims == 1 and np.ndim(x) == 0:
        return (np.asarray(x, dtype=float),)
    if len(x) != problem.dims:
        raise ValueError(f"expected a point with {problem.dims} coordinates")
    return tuple(np.asarray(xi, dtype=float) for xi in x)


def _vector(problem: ControlProblem, p) -> list:
    if problem.dims == 1 and np.ndim(p) == 0:
        return [np.asarray(p, dtype=float)]
    if len(p) != problem.dims:
        raise ValueError(f"expected {problem.dims} gradient components")
    return [np.asarray(v, dtype=float) for v in p]


def hamiltonian(problem: ControlProblem, x, t, p):
    """Hamiltonian ``H(x, t, p) = sup_alpha {-<f, p> - L(alpha)}``.

    ``x`` and ``p`` hold one entry per spatial dimension (scalars or
    broadcastable arrays); in 1D a scalar ``p`` is accepted.
    """
    A, b = problem.coefficients_at(_point(problem, x), t)
    return hamiltonian_from_coefficients(problem.lagrangian, A, b, _vector(problem, p))


def numerical_hamiltonian(problem: ControlProblem, x, t, p_up, p_down):
    """Upwind numerical Hamiltonian with the sum-form numerical Lagrangian.

    Non-increasing in every ``p_up`` component and non-decreasing in every
    ``p_down`` component.
    """
    A, b = problem.coefficients_at(_point(problem, x), t)
    return numerical_hamiltonian_from_coefficients(
        problem.lagrangian, A, b, _vector(problem, p_up), _vector(problem, p_down)
    )


def prox_alpha(
    problem: ControlProblem,
    x,
    t,
    grad_sample,
    rho,
    alpha_prev,
    tau_alpha: float,
    branch: str,
    axis: Optional[int] = None,
    rho_floor: float = RHO_FLOOR,
):
    """Closed-form proximal update of one upwind control slot.

    Parameters
    ----------
    grad_sample : float
        The one-sided difference matching ``branch`` (forward for ``"up"``).
    rho : float
        Multiplier; values below ``rho_floor`` are replaced by it.
    axis : int, optional
        Control-dependent dimension; defaults to the first one.
    """
    if axis is None:
        axis = problem.dynamics.control_axes[0]
    if not problem.dynamics.control_dependent(axis):
        raise ValueError(f"dimension {axis} carries no control")
    A, _ = problem.coefficients_at(_point(problem, x), t)
    out = prox_branch(
        problem.lagrangian, A[axis], grad_sample, rho, alpha_prev, tau_alpha, branch, rho_floor
    )
    return out if np.ndim(out) else float(out)


# --- scheme checkers ---------------------------------------------------------


@dataclass
class ConsistencyReport:
    max_deviation: float
    worst_point: dict = field(default_factory=dict)


@dataclass
class MonotonicityReport:
    violations: int
    probes: int


def _samples(problem: ControlProblem, sample_count: int, n_grad: int, p_max: float, seed: int):
    """Quasi-uniform samples of ``(x, t, p_1, ..., p_n_grad)``."""
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    dims = problem.dims
    u = qmc.Halton(d=dims + 1 + n_grad, seed=seed).random(sample_count)
    x = []
    for d, (a, b) in enumerate(problem.grid.domain):
        x.append(a + (b - a) * u[:, d])
    t = problem.grid.T * u[:, dims]
    p = -p_max + 2 * p_max * u[:, dims + 1:]
    return tuple(x), t, p


def check_consistency(
    problem: ControlProblem,
    sample_count: int = 1000,
    p_max: float = 5.0,
    seed: int = 0,
    numerical: Optional[Callable] = None,
) -> ConsistencyReport:
    """Largest ``|H_hat(x, t, p, p) - H(x, t, p)|`` over quasi-random samples.

    ``numerical`` may replace :func:`numerical_hamiltonian` (same signature),
    which is how deliberately broken discretizations are tested.
    """
    numerical = numerical or numerical_hamiltonian
    x, t, p = _samples(problem, sample_count, problem.dims, p_max, seed)
    grads = [p[:, d] for d in range(problem.dims)]
    exact = hamiltonian(problem, x, t, grads)
    approx = numerical(problem, x, t, grads, grads)
    dev = np.abs(np.broadcast_to(approx, exact.shape) - exact)
    k = int(np.argmax(dev))
    worst = {
        "x": [float(xi[k]) for xi in x],
        "t": float(t[k]),
        "p": [float(g[k]) for g in grads],
    }
    return ConsistencyReport(float(dev[k]), worst)


def check_monotonicity(
    problem: ControlProblem,
    sample_count: int = 1000,
    p_max: float = 5.0,
    step: float = 1e-3,
    tol: float = 1e-9,
    seed: int = 0,
    numerical: Optional[Callable] = None,
) -> MonotonicityReport:
    """Count upwind-monotonicity violations of the numerical Hamiltonian.

    At each sample, every ``p_up`` component is increased by ``step`` (the
    value must not increase) and every ``p_down`` component likewise (the
    value must not decrease).
    """
    numerical = numerical or numerical_hamiltonian
    dims = problem.dims
    x, t, p = _samples(problem, sample_count, 2 * dims, p_max, seed)
    up = [p[:, d] for d in range(dims)]
    down = [p[:, dims + d] for d in range(dims)]
    base = numerical(problem, x, t, up, down)
    violations = 0
    probes = 0
    for d in range(dims):
        bumped = list(up)
        bumped[d] = up[d] + step
        violations += int(np.sum(numerical(problem, x, t, bumped, down) - base > tol))
        bumped = list(down)
        bumped[d] = down[d] + step
        violations += int(np.sum(numerical(problem, x, t, up, bumped) - base < -tol))
        probes += 2 * sample_count
    return MonotonicityReport(violations, probes)
