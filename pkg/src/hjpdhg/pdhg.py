"""Primal-dual hybrid gradient solver for the discrete HJ saddle problem.

The value function ``phi`` (time-reversed, ``phi[0] = g``) is the primal
variable; the multiplier ``rho`` and the upwind control slots ``alpha``
are the dual variables of

    min_phi max_{rho >= 0, alpha}
        sum_{k >= 1} rho_k * [D_t^- phi - sum_d (f_up D_d^+ phi + f_down D_d^- phi)
                              - L_hat(alpha) - eps sum_d D_dd phi]
        - (c / dt) sum phi_{n_t - 1}.

One outer iteration performs ``n_inner`` sweeps of (rho-update,
alpha-update) against the extrapolated ``phi_tilde``, then a preconditioned
gradient step in ``phi`` followed by the extrapolation
``phi_tilde = 2 phi_new - phi_old``.

The ``phi`` step applies ``(I - D_tt - sum_d D_dd)^{-1}`` on the slices
``k >= 1`` with slice 0 held at zero, so the pinned slice never feeds back
into the preconditioned direction.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import precond
from .grid import _shift, diff_space_adjoint
from .problem import (
    RHO_FLOOR,
    ControlProblem,
    branch_interval,
    branch_residual,
    numerical_hamiltonian_from_coefficients,
    prox_branch,
)


@dataclass(frozen=True)
class PdhgConfig:
    """Solver settings.

    Step sizes left as ``None`` are derived from the operator-norm bound
    ``B`` of :func:`estimate_stepsize_bound` as
    ``tau_phi = theta * s / B`` and ``tau_rho = tau_alpha = theta / (s * B)``,
    with ``theta = step_scale`` and ``s = primal_weight``.

    Parameters
    ----------
    tau_rho, tau_alpha, tau_phi : float, optional
    c : float
        Terminal value of the multiplier.
    n_inner : int
        (rho, alpha) sweeps per phi-update.
    max_outer : int
        Cap on outer iterations.
    tol : float
        Stop when all three optimality residuals are below ``tol``.
    windows : int
        Number of sequential time windows.
    rho_floor : float
        Lower bound substituted for ``rho`` in the alpha prox.
    check_every : int
        Residuals are evaluated after the first iteration and then every
        ``check_every`` iterations.
    time_limit : float, optional
        Wall-clock cap in seconds per window.
    step_scale, primal_weight : float
        ``theta`` and ``s`` of the automatic step rule.
    """

    tau_rho: Optional[float] = None
    tau_alpha: Optional[float] = None
    tau_phi: Optional[float] = None
    c: float = 1.0
    n_inner: int = 1
    max_outer: int = 200_000
    tol: float = 1e-6
    windows: int = 1
    rho_floor: float = RHO_FLOOR
    check_every: int = 10
    time_limit: Optional[float] = None
    step_scale: float = 0.7
    primal_weight: float = math.sqrt(10.0)

    def __post_init__(self):
        for name in ("tau_rho", "tau_alpha", "tau_phi"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if not self.c > 0:
            raise ValueError("c must be positive")
        if self.n_inner < 1 or self.max_outer < 1 or self.windows < 1 or self.check_every < 1:
            raise ValueError("iteration counts must be positive")
        if not (self.tol > 0 and self.rho_floor > 0):
            raise ValueError("tol and rho_floor must be positive")
        if not (self.step_scale > 0 and self.primal_weight > 0):
            raise ValueError("step_scale and primal_weight must be positive")


@dataclass
class SolverState:
    """PDHG iterates on the grid of one problem.

    ``alpha_up[d]`` and ``alpha_down[d]`` exist for every control-dependent
    dimension ``d``.  ``rho[0]`` is not part of the saddle problem and is
    kept at ``c``.
    """

    phi: np.ndarray
    phi_tilde: np.ndarray
    rho: np.ndarray
    alpha_up: dict
    alpha_down: dict
    c: float = 1.0

    def branches(self):
        """Yield ``(name, axis, branch, array)`` for every control slot."""
        for d in sorted(self.alpha_up):
            yield f"{d + 1}_up", d, "up", self.alpha_up[d]
            yield f"{d + 1}_down", d, "down", self.alpha_down[d]

    def copy(self) -> "SolverState":
        return SolverState(
            self.phi.copy(),
            self.phi_tilde.copy(),
            self.rho.copy(),
            {d: a.copy() for d, a in self.alpha_up.items()},
            {d: a.copy() for d, a in self.alpha_down.items()},
            self.c,
        )


@dataclass
class SolveReport:
    """Outcome of a solve.

    ``residual_history[q]`` holds (HJ, prox, continuity) sup-norm residuals
    after outer iteration ``iterations[q]``.
    """

    outer_iterations: int
    residual_history: np.ndarray
    iterations: np.ndarray
    converged: bool
    wall_time: float
    step_sizes: dict = field(default_factory=dict)

    @property
    def final_residuals(self) -> tuple:
        if len(self.residual_history) == 0:
            return (math.nan,) * 3
        return tuple(float(v) for v in self.residual_history[-1])


# --- discrete operators ------------------------------------------------------


class SaddleOperator:
    """Discrete operators of the saddle problem on one grid.

    Caches the coefficient arrays and the pinned preconditioner.  Methods
    take and return plain arrays of shape ``grid.shape``.
    """

    def __init__(self, problem: ControlProblem):
        self.problem = problem
        self.grid = grid = problem.grid
        self.A, self.b = problem.grid_coefficients
        self.lagrangian = problem.lagrangian
        self.eps = problem.epsilon
        self.control_axes = problem.dynamics.control_axes
        self.periodic = [bc == "periodic" for bc in grid.bc]
        self.dx = grid.dx
        self.dt = grid.dt
        self.b_plus = [np.maximum(v, 0.0) for v in self.b]
        self.b_minus = [np.minimum(v, 0.0) for v in self.b]
        self._solver = None
        self.bounds = {
            (d, br): branch_interval(self.lagrangian, self.A[d], br)
            for d in self.control_axes
            for br in ("up", "down")
        }

    @property
    def solver(self) -> precond.HelmholtzSolver:
        if self._solver is None:
            self._solver = precond.build(self.grid, "pinned")
        return self._solver

    # first and second differences along spatial dimension d
    def forward(self, u, d):
        return (_shift(u, d + 1, 1, self.periodic[d]) - u) / self.dx[d]

    def backward(self, u, d):
        return (u - _shift(u, d + 1, -1, self.periodic[d])) / self.dx[d]

    def second(self, u, d):
        ax = d + 1
        p = self.periodic[d]
        return (_shift(u, ax, 1, p) + _shift(u, ax, -1, p) - 2 * u) / self.dx[d] ** 2

    def forward_T(self, u, d):
        """Transpose of :meth:`forward`."""
        if self.periodic[d]:
            return -self.backward(u, d)
        return diff_space_adjoint(u, self.grid, d, "forward")

    def backward_T(self, u, d):
        """Transpose of :meth:`backward`."""
        if self.periodic[d]:
            return -self.forward(u, d)
        return diff_space_adjoint(u, self.grid, d, "backward")

    def slopes(self, phi):
        """Forward and backward differences of ``phi`` for every dimension."""
        dims = self.grid.dims
        return [self.forward(phi, d) for d in range(dims)], [
            self.backward(phi, d) for d in range(dims)
        ]

    def time_derivative(self, phi):
        out = np.zeros_like(phi)
        out[1:] = (phi[1:] - phi[:-1]) / self.dt
        return out

    def laplacian(self, u):
        return sum(self.second(u, d) for d in range(self.grid.dims))

    def velocities(self, alpha_up, alpha_down):
        """Upwind velocities ``(f_up[d], f_down[d])``, ``f_up >= 0 >= f_down``."""
        f_up, f_down = [], []
        for d in range(self.grid.dims):
            if d in self.control_axes:
                f_up.append(np.maximum(self.A[d] * alpha_up[d], 0.0))
                f_down.append(np.minimum(self.A[d] * alpha_down[d], 0.0))
            else:
                f_up.append(self.b_plus[d])
                f_down.append(self.b_minus[d])
        return f_up, f_down

    def running_cost(self, alpha_up, alpha_down):
        if self.lagrangian.kind == "box_indicator":
            return 0.0
        w = self.lagrangian.weight
        return sum(0.5 * w * (alpha_up[d] ** 2 + alpha_down[d] ** 2) for d in self.control_axes)

    def bracket(self, phi, alpha_up, alpha_down, slopes=None):
        """Coefficient of ``rho`` in the saddle function (the HJ defect)."""
        p_up, p_down = slopes if slopes is not None else self.slopes(phi)
        f_up, f_down = self.velocities(alpha_up, alpha_down)
        out = self.time_derivative(phi) - self.running_cost(alpha_up, alpha_down)
        for d in range(self.grid.dims):
            out = out - f_up[d] * p_up[d] - f_down[d] * p_down[d]
        if self.eps > 0:
            out = out - self.eps * self.laplacian(phi)
        return out

    def continuity(self, rho, alpha_up, alpha_down, c):
        """Negative gradient of the saddle function in ``phi``.

        Equals ``D_t^+ rho + sum_d [D_d^+^T (f_up rho) + D_d^-^T (f_down rho)]
        + eps sum_d D_dd rho`` with ``rho[0]`` treated as zero and the ghost
        ``rho[n_t] = c``.  Only slices ``k >= 1`` are meaningful.
        """
        r = rho.copy()
        r[0] = 0.0
        out = np.empty_like(r)
        out[:-1] = (r[1:] - r[:-1]) / self.dt
        out[-1] = (c - r[-1]) / self.dt
        f_up, f_down = self.velocities(alpha_up, alpha_down)
        for d in range(self.grid.dims):
            out += self.forward_T(f_up[d] * r, d) + self.backward_T(f_down[d] * r, d)
        if self.eps > 0:
            out += self.eps * self.laplacian(r)
        return out

    def hj_defect(self, phi):
        """``D_t^- phi + H_hat(D^+ phi, D^- phi) - eps Lap phi``."""
        p_up, p_down = self.slopes(phi)
        out = self.time_derivative(phi) + numerical_hamiltonian_from_coefficients(
            self.lagrangian, self.A, self.b, p_up, p_down
        )
        if self.eps > 0:
            out = out - self.eps * self.laplacian(phi)
        return out


# --- public operations -------------------------------------------------------


def estimate_stepsize_bound(problem: ControlProblem) -> float:
    """Bound ``max(1, sup |b|_inf)^2 + sup |A|^2`` sampled on the grid."""
    A, b = problem.grid_coefficients
    sup_b = max(float(np.max(np.abs(v))) for v in b)
    sup_a = max((float(np.max(np.abs(a))) for a in A if a is not None), default=0.0)
    return max(1.0, sup_b) ** 2 + sup_a**2


def viscous_derating(problem: ControlProblem) -> float:
    """Step multiplier ``B / (B + 2 eps sum_d 1/dx_d)`` for viscous problems.

    The diffusion coupling ``eps sum_d D_dd`` adds up to ``2 eps / dx_d`` per
    dimension to the operator norm; both step sizes are scaled by the ratio
    of the first-order bound ``B`` to the augmented bound.
    """
    if problem.epsilon <= 0:
        return 1.0
    B = estimate_stepsize_bound(problem)
    coupling = 2 * problem.epsilon * sum(1.0 / h for h in problem.grid.dx)
    return B / (B + coupling)


def resolve_steps(problem: ControlProblem, config: PdhgConfig) -> dict:
    """Step sizes actually used, filling unset ones from the automatic rule."""
    B = estimate_stepsize_bound(problem)
    derate = viscous_derating(problem)
    s, theta = config.primal_weight, config.step_scale
    auto_phi = derate * theta * s / B
    auto_dual = derate * theta / (s * B)
    return {
        "tau_rho": config.tau_rho if config.tau_rho is not None else auto_dual,
        "tau_alpha": config.tau_alpha if config.tau_alpha is not None else auto_dual,
        "tau_phi": config.tau_phi if config.tau_phi is not None else auto_phi,
        "bound": B,
        "derating": derate,
    }


def init_state(problem: ControlProblem, config: PdhgConfig) -> SolverState:
    """``phi = g`` on every slice, ``rho = c``, all controls zero."""
    grid = problem.grid
    phi = np.broadcast_to(problem.terminal_values, grid.shape).copy()
    rho = np.full(grid.shape, float(config.c))
    zeros = {d: np.zeros(grid.shape) for d in problem.dynamics.control_axes}
    return SolverState(
        phi, phi.copy(), rho, zeros, {d: z.copy() for d, z in zeros.items()}, float(config.c)
    )


def _rho_step(op, state, slopes, tau_rho):
    bracket = op.bracket(state.phi_tilde, state.alpha_up, state.alpha_down, slopes)
    state.rho[1:] = np.maximum(state.rho[1:] + tau_rho * bracket[1:], 0.0)


def _alpha_step(op, state, slopes, tau_alpha, rho_floor):
    p_up, p_down = slopes
    lag = op.lagrangian
    for d in op.control_axes:
        state.alpha_up[d] = prox_branch(
            lag, op.A[d], p_up[d], state.rho, state.alpha_up[d], tau_alpha, "up", rho_floor,
            op.bounds[d, "up"],
        )
        state.alpha_down[d] = prox_branch(
            lag, op.A[d], p_down[d], state.rho, state.alpha_down[d], tau_alpha, "down",
            rho_floor, op.bounds[d, "down"],
        )


def _phi_step(op, state, tau_phi, solver, g):
    residual = op.continuity(state.rho, state.alpha_up, state.alpha_down, state.c)
    residual[0] = 0.0
    old = state.phi
    new = old + tau_phi * precond.apply(solver, residual)
    new[0] = g
    state.phi = new
    state.phi_tilde = 2 * new - old
    return residual


def update_rho(state: SolverState, problem: ControlProblem, config: PdhgConfig,
               op: Optional[SaddleOperator] = None) -> SolverState:
    """Projected ascent ``rho <- max(rho + tau_rho * bracket(phi_tilde), 0)``
    on slices ``k >= 1``.  Updates ``state`` in place and returns it.
    """
    op = op or SaddleOperator(problem)
    steps = resolve_steps(problem, config)
    _rho_step(op, state, op.slopes(state.phi_tilde), steps["tau_rho"])
    return state


def update_alpha(state: SolverState, problem: ControlProblem, config: PdhgConfig,
                 op: Optional[SaddleOperator] = None) -> SolverState:
    """Proximal step of every control slot against ``phi_tilde``.

    Uses the current ``rho``, so it should follow :func:`update_rho`.
    """
    op = op or SaddleOperator(problem)
    steps = resolve_steps(problem, config)
    _alpha_step(op, state, op.slopes(state.phi_tilde), steps["tau_alpha"], config.rho_floor)
    return state


def update_phi(state: SolverState, problem: ControlProblem, config: PdhgConfig,
               solver: Optional[precond.HelmholtzSolver] = None,
               op: Optional[SaddleOperator] = None) -> SolverState:
    """Preconditioned descent in ``phi``, re-pinning and extrapolation.

    ``solver`` defaults to the pinned preconditioner of the problem grid.
    """
    op = op or SaddleOperator(problem)
    solver = solver or op.solver
    steps = resolve_steps(problem, config)
    _phi_step(op, state, steps["tau_phi"], solver, problem.terminal_values)
    return state


def optimality_residuals(state: SolverState, problem: ControlProblem,
                         op: Optional[SaddleOperator] = None) -> tuple[float, float, float]:
    """Sup-norm defects of the three optimality conditions on slices ``k >= 1``.

    Returns
    -------
    hj : float
        ``|D_t^- phi + H_hat(D^+ phi, D^- phi) - eps Lap phi|``.
    prox : float
        Stationarity defect of the stored controls for their branch
        problems given ``phi`` (see :func:`branch_residual`).
    continuity : float
        Defect of the discrete continuity equation with ghost ``rho = c``.
    """
    op = op or SaddleOperator(problem)
    hj = float(np.max(np.abs(op.hj_defect(state.phi)[1:])))
    p_up, p_down = op.slopes(state.phi)
    prox = 0.0
    for d in op.control_axes:
        for p, alpha, branch in ((p_up, state.alpha_up, "up"), (p_down, state.alpha_down, "down")):
            res = branch_residual(op.lagrangian, op.A[d][1:], p[d][1:], alpha[d][1:], branch)
            prox = max(prox, float(np.max(res)))
    cont = op.continuity(state.rho, state.alpha_up, state.alpha_down, state.c)
    return hj, prox, float(np.max(np.abs(cont[1:])))


def _solve_single(problem: ControlProblem, config: PdhgConfig, state=None):
    op = SaddleOperator(problem)
    solver = op.solver
    steps = resolve_steps(problem, config)
    g = problem.terminal_values
    state = init_state(problem, config) if state is None else state
    history, iterations = [], []
    converged = False
    start = time.perf_counter()
    it = 0
    while it < config.max_outer:
        it += 1
        slopes = op.slopes(state.phi_tilde)
        for _ in range(config.n_inner):
            _rho_step(op, state, slopes, steps["tau_rho"])
            _alpha_step(op, state, slopes, steps["tau_alpha"], config.rho_floor)
        _phi_step(op, state, steps["tau_phi"], solver, g)

        timed_out = (
            config.time_limit is not None and time.perf_counter() - start > config.time_limit
        )
        if it == 1 or it % config.check_every == 0 or it == config.max_outer or timed_out:
            res = optimality_residuals(state, problem, op)
            history.append(res)
            iterations.append(it)
            if not all(np.isfinite(res)):
                break
            if max(res) <= config.tol:
                converged = True
                break
        if timed_out:
            break
    report = SolveReport(
        outer_iterations=it,
        residual_history=np.array(history, dtype=float).reshape(-1, 3),
        iterations=np.array(iterations, dtype=int),
        converged=converged,
        wall_time=time.perf_counter() - start,
        step_sizes=steps,
    )
    return state, report


def solve(problem: ControlProblem, config: Optional[PdhgConfig] = None):
    """Run PDHG until the residuals drop below ``config.tol``.

    Returns
    -------
    state : SolverState
    report : SolveReport
        ``converged`` is False when ``max_outer`` or ``time_limit`` is hit
        first; no exception is raised.
    """
    config = config or PdhgConfig()
    if config.windows > 1:
        return solve_windowed(problem, config)
    return _solve_single(problem, config)


def solve_windowed(problem: ControlProblem, config: Optional[PdhgConfig] = None):
    """Solve ``config.windows`` consecutive time windows in sequence.

    Window ``w`` starts from the last slice of window ``w - 1`` and uses the
    same terminal multiplier ``c``.  The fields are concatenated, with the
    shared slice taken from the earlier window.
    """
    config = config or PdhgConfig()
    W = config.windows
    grid = problem.grid
    if W == 1:
        return _solve_single(problem, config)
    if (grid.n_t - 1) % W:
        raise ValueError(f"{W} windows do not divide the {grid.n_t - 1} time intervals")
    m = (grid.n_t - 1) // W
    single = replace(config, windows=1)
    initial = problem.terminal_values
    parts, reports = [], []
    for w in range(W):
        sub = problem.restrict(w * m, (w + 1) * m, initial)
        state, report = _solve_single(sub, single)
        parts.append(state)
        reports.append(report)
        initial = state.phi[-1]

    def join(arrays):
        return np.concatenate([arrays[0]] + [a[1:] for a in arrays[1:]], axis=0)

    state = SolverState(
        join([s.phi for s in parts]),
        join([s.phi_tilde for s in parts]),
        join([s.rho for s in parts]),
        {d: join([s.alpha_up[d] for s in parts]) for d in parts[0].alpha_up},
        {d: join([s.alpha_down[d] for s in parts]) for d in parts[0].alpha_down},
        parts[0].c,
    )
    offsets = np.cumsum([0] + [r.outer_iterations for r in reports[:-1]])
    report = SolveReport(
        outer_iterations=int(sum(r.outer_iterations for r in reports)),
        residual_history=np.concatenate([r.residual_history for r in reports]),
        iterations=np.concatenate([r.iterations + o for r, o in zip(reports, offsets)]),
        converged=all(r.converged for r in reports),
        wall_time=float(sum(r.wall_time for r in reports)),
        step_sizes=reports[0].step_sizes,
    )
    return state, report
