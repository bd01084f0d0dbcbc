"""Uniform space-time grids and finite-difference operators.

Fields are plain ``numpy`` arrays stored time-major: ``values[k, i]`` in one
spatial dimension and ``values[k, i, j]`` in two.  Spatial operators also
accept arrays that carry only the trailing spatial axes (a single time slice).

Periodic axes exclude the right endpoint.  Neumann axes include both
endpoints and use a reflected ghost value equal to the boundary value, so a
one-sided difference across the boundary vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

BOUNDARY_CONDITIONS = ("periodic", "neumann")
SCHEMES = ("forward", "backward", "second")


@dataclass(frozen=True)
class Grid:
    """Uniform lattice on ``[0, T] x prod_d [a_d, b_d]``.

    Parameters
    ----------
    domain : sequence of (float, float)
        Interval ``(a_d, b_d)`` for each spatial axis.
    n_space : sequence of int
        Number of points per spatial axis.
    n_t : int
        Number of time slices, including ``t = 0`` and ``t = T``.
    T : float
        Time horizon.
    bc : sequence of str
        ``"periodic"`` or ``"neumann"`` for each spatial axis.
    """

    domain: tuple[tuple[float, float], ...]
    n_space: tuple[int, ...]
    n_t: int
    T: float
    bc: tuple[str, ...]

    def __post_init__(self):
        domain = tuple((float(a), float(b)) for a, b in self.domain)
        n_space = tuple(int(n) for n in self.n_space)
        bc = tuple(str(b) for b in self.bc)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "n_space", n_space)
        object.__setattr__(self, "bc", bc)
        object.__setattr__(self, "n_t", int(self.n_t))
        object.__setattr__(self, "T", float(self.T))

        if len(domain) not in (1, 2):
            raise ValueError("only 1 or 2 spatial dimensions are supported")
        if not (len(n_space) == len(bc) == len(domain)):
            raise ValueError("domain, n_space and bc must have one entry per axis")
        for a, b in domain:
            if not (np.isfinite(a) and np.isfinite(b) and b > a):
                raise ValueError(f"invalid interval [{a}, {b}]")
        if min(n_space) < 3 or self.n_t < 3:
            raise ValueError("every axis needs at least 3 points")
        for b in bc:
            if b not in BOUNDARY_CONDITIONS:
                raise ValueError(f"unknown boundary condition {b!r}")
        if not (np.isfinite(self.T) and self.T > 0):
            raise ValueError("T must be positive")

    @property
    def dims(self) -> int:
        return len(self.n_space)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_t,) + self.n_space

    @property
    def dt(self) -> float:
        return self.T / (self.n_t - 1)

    @property
    def dx(self) -> tuple[float, ...]:
        out = []
        for (a, b), n, bc in zip(self.domain, self.n_space, self.bc):
            out.append((b - a) / n if bc == "periodic" else (b - a) / (n - 1))
        return tuple(out)

    def axis_points(self, axis: int) -> np.ndarray:
        """Coordinates of the points along one spatial axis."""
        a = self.domain[axis][0]
        return a + self.dx[axis] * np.arange(self.n_space[axis])

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_t)

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape ``n_space`` (``ij`` indexing)."""
        axes = [self.axis_points(d) for d in range(self.dims)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def with_time(self, n_t: int, T: float) -> "Grid":
        """Same spatial lattice with a different time axis."""
        return Grid(self.domain, self.n_space, n_t, T, self.bc)

    def wrap(self, x: Sequence[float]) -> np.ndarray:
        """Map a point into the fundamental domain.

        Periodic axes wrap, Neumann axes clamp.
        """
        x = np.array(x, dtype=float)
        for d, ((a, b), bc) in enumerate(zip(self.domain, self.bc)):
            if bc == "periodic":
                x[..., d] = a + np.mod(x[..., d] - a, b - a)
            else:
                x[..., d] = np.clip(x[..., d], a, b)
        return x


def _check_space(values: np.ndarray, grid: Grid, axis: int) -> int:
    if not 0 <= axis < grid.dims:
        raise ValueError(f"invalid axis {axis} for a {grid.dims}D grid")
    if values.ndim < grid.dims or values.shape[values.ndim - grid.dims:] != grid.n_space:
        raise ValueError(
            f"array of shape {values.shape} does not match spatial grid {grid.n_space}"
        )
    return values.ndim - grid.dims + axis


def _shift(values: np.ndarray, ax: int, offset: int, periodic: bool) -> np.ndarray:
    """Return ``values`` at index ``i + offset`` along ``ax`` (offset = +-1)."""
    if periodic:
        return np.roll(values, -offset, axis=ax)
    body = [slice(None)] * values.ndim
    edge = [slice(None)] * values.ndim
    if offset > 0:
        body[ax], edge[ax] = slice(1, None), slice(-1, None)
        parts = (values[tuple(body)], values[tuple(edge)])
    else:
        body[ax], edge[ax] = slice(0, -1), slice(0, 1)
        parts = (values[tuple(edge)], values[tuple(body)])
    return np.concatenate(parts, axis=ax)


def diff_space(values: np.ndarray, grid: Grid, axis: int, scheme: str) -> np.ndarray:
    """One-sided or second difference along a spatial axis.

    Parameters
    ----------
    values : ndarray
        Array whose trailing axes match ``grid.n_space``.
    grid : Grid
    axis : int
        Spatial axis, ``0 <= axis < grid.dims``.
    scheme : {"forward", "backward", "second"}

    Returns
    -------
    ndarray
        Same shape as ``values``.
    """
    values = np.asarray(values, dtype=float)
    ax = _check_space(values, grid, axis)
    periodic = grid.bc[axis] == "periodic"
    h = grid.dx[axis]
    if scheme == "forward":
        return (_shift(values, ax, 1, periodic) - values) / h
    if scheme == "backward":
        return (values - _shift(values, ax, -1, periodic)) / h
    if scheme == "second":
        return (
            _shift(values, ax, 1, periodic) + _shift(values, ax, -1, periodic) - 2 * values
        ) / h**2
    raise ValueError(f"unknown scheme {scheme!r}")


def diff_space_adjoint(values: np.ndarray, grid: Grid, axis: int, scheme: str) -> np.ndarray:
    """Transpose of :func:`diff_space` with respect to the plain sum pairing.

    ``sum(psi * diff_space(phi, ...)) == sum(phi * diff_space_adjoint(psi, ...))``
    holds for both boundary conditions.  On periodic axes the transpose of
    the forward difference is minus the backward difference and vice versa.
    """
    values = np.asarray(values, dtype=float)
    ax = _check_space(values, grid, axis)
    h = grid.dx[axis]
    if scheme == "second":
        return diff_space(values, grid, axis, "second")
    if grid.bc[axis] == "periodic":
        if scheme == "forward":
            return -diff_space(values, grid, axis, "backward")
        if scheme == "backward":
            return -diff_space(values, grid, axis, "forward")
        raise ValueError(f"unknown scheme {scheme!r}")

    # Neumann: the boundary rows of the one-sided differences are identically 0.
    n = values.shape[ax]
    mask = np.ones(n)
    if scheme == "forward":
        mask[-1] = 0.0
    elif scheme == "backward":
        mask[0] = 0.0
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    shape = [1] * values.ndim
    shape[ax] = n
    v = values * mask.reshape(shape)
    out = np.zeros_like(v)
    lo = [slice(None)] * values.ndim
    hi = [slice(None)] * values.ndim
    lo[ax] = slice(0, n - 1)
    hi[ax] = slice(1, n)
    lo, hi = tuple(lo), tuple(hi)
    if scheme == "forward":
        out -= v
        out[hi] += v[lo]
    else:
        out += v
        out[lo] -= v[hi]
    return out / h


def diff_time(values: np.ndarray, grid: Grid, scheme: str) -> np.ndarray:
    """Difference along the time axis (axis 0).

    The backward difference is meaningful for ``k >= 1`` and the forward
    difference for ``k <= n_t - 2`` (zero-based); the remaining slice is set
    to zero.  The second difference uses reflected ghosts at both ends.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise ValueError(f"array of shape {values.shape} does not match grid {grid.shape}")
    dt = grid.dt
    out = np.zeros_like(values)
    if scheme == "backward":
        out[1:] = (values[1:] - values[:-1]) / dt
    elif scheme == "forward":
        out[:-1] = (values[1:] - values[:-1]) / dt
    elif scheme == "second":
        out[1:-1] = values[2:] + values[:-2] - 2 * values[1:-1]
        out[0] = values[1] - values[0]
        out[-1] = values[-2] - values[-1]
        out /= dt**2
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return out
