"""Named coefficient functions, terminal costs and problem presets.

Coefficient factories take keyword parameters and the spatial dimension
``d`` they are attached to, and return ``fn(x, s)``.  Terminal costs return
``g(x)``.  All functions act on tuples of coordinate arrays.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .grid import Grid
from .problem import AffineDynamics, ControlProblem, Lagrangian


def quadratic_xdep(d: int, center: float = 1.0, offset: float = 0.1) -> Callable:
    """``A_d(x) = -(|x_d - center|^2 + offset)``."""
    def fn(x, s):
        return -((x[d] - center) ** 2 + offset)
    return fn


def constant(d: int, value: float = 1.0) -> Callable:
    """Constant coefficient."""
    def fn(x, s):
        return np.full(np.shape(x[d]), float(value))
    return fn


def state(d: int, index: int = 0, scale: float = 1.0) -> Callable:
    """Coefficient proportional to one state coordinate, ``scale * x_index``."""
    def fn(x, s):
        return scale * x[index]
    return fn


COEFFICIENTS = {
    "quadratic_xdep": quadratic_xdep,
    "constant": constant,
    "state": state,
}


def sin_pi(scale: float = 1.0) -> Callable:
    """``g(x) = scale * sum_d sin(pi x_d)``."""
    def g(x):
        return scale * sum(np.sin(np.pi * xi) for xi in x)
    return g


def gauss_sin() -> Callable:
    """``g(x) = exp(-x_1^2 / 2) sin(pi x_2)``."""
    def g(x):
        return np.exp(-x[0] ** 2 / 2) * np.sin(np.pi * x[1])
    return g


def constant_cost(value: float = 0.0) -> Callable:
    """Constant terminal cost."""
    def g(x):
        return np.full(np.shape(x[0]), float(value))
    return g


TERMINAL_COSTS = {
    "sin_pi": sin_pi,
    "gauss_sin": gauss_sin,
    "constant": constant_cost,
}


def dynamics_preset(name: str, dims: int, **params) -> AffineDynamics:
    """Whole-dynamics presets.

    ``"quadratic_xdep"``
        ``f_d = -(|x_d - 1|^2 + 0.1) alpha_d`` in every dimension.
    ``"newton"``
        ``f = (alpha, x_1)`` in two dimensions.
    ``"zero"``
        ``f = 0 * alpha``.
    """
    if name == "quadratic_xdep":
        return AffineDynamics([quadratic_xdep(d, **params) for d in range(dims)], [None] * dims)
    if name == "newton":
        if dims != 2:
            raise ValueError("the newton preset is two-dimensional")
        return AffineDynamics([constant(0, 1.0), None], [None, state(1, index=0)])
    if name == "zero":
        return AffineDynamics([constant(d, 0.0) for d in range(dims)], [None] * dims)
    raise ValueError(f"unknown dynamics preset {name!r}")


def example_problem(
    name: str,
    n_x: int = 160,
    n_t: int = 41,
    T: float = 1.0,
    epsilon: float = 0.0,
    n_y: int = 80,
) -> ControlProblem:
    """Reference problems used in tests and demos.

    ``"quadratic"``
        ``A = -(|x-1|^2 + 0.1)``, ``L = alpha^2 / 2``, ``g = sin(pi x)`` on
        the periodic interval ``[0, 2)``.
    ``"box"``
        Same dynamics and cost ``g`` with ``|alpha| <= 1``.
    ``"newton"``
        ``f = (alpha, x_1)`` on ``[-2, 2] x [-1, 1)`` (Neumann in ``x_1``,
        periodic in ``x_2``), ``L = alpha^2 / 2``,
        ``g = exp(-x_1^2/2) sin(pi x_2)``.
    ``"quadratic2d"`` / ``"box2d"``
        Two-dimensional versions of the first two on ``[0, 2)^2`` with
        ``g = sin(pi x_1) + sin(pi x_2)``.
    """
    if name in ("quadratic", "box"):
        grid = Grid([(0.0, 2.0)], [n_x], n_t, T, ["periodic"])
        lag = Lagrangian("quadratic") if name == "quadratic" else Lagrangian("box_indicator")
        return ControlProblem(grid, dynamics_preset("quadratic_xdep", 1), lag, sin_pi(), epsilon)
    if name in ("quadratic2d", "box2d"):
        grid = Grid([(0.0, 2.0)] * 2, [n_x, n_y], n_t, T, ["periodic"] * 2)
        lag = Lagrangian("quadratic") if name == "quadratic2d" else Lagrangian("box_indicator")
        return ControlProblem(grid, dynamics_preset("quadratic_xdep", 2), lag, sin_pi(), epsilon)
    if name == "newton":
        grid = Grid([(-2.0, 2.0), (-1.0, 1.0)], [n_x, n_y], n_t, T, ["neumann", "periodic"])
        return ControlProblem(
            grid, dynamics_preset("newton", 2), Lagrangian("quadratic"), gauss_sin(), epsilon
        )
    raise ValueError(f"unknown example {name!r}")
