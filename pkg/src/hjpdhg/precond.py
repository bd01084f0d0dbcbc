"""Spectral solver for ``(I - D_tt - sum_d D_dd) u = r`` on a space-time grid.

Every axis is diagonalized separately: periodic spatial axes by the FFT,
Neumann spatial axes by the orthonormal DCT-II (the eigenbasis of the
second difference with ghost equal to the boundary value), and the time
axis either by the DCT-II as well (``time_bc="neumann"``) or, for the
pinned variant used inside the solver, by the eigenvectors of the
tridiagonal operator acting on slices ``k >= 1`` with the first slice held
at zero.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import fft
from scipy.linalg import eigh_tridiagonal

from .grid import Grid


def _workers() -> int:
    """Thread count for the transforms, from ``HJPDHG_THREADS`` (0 = all)."""
    try:
        n = int(os.environ.get("HJPDHG_THREADS", "1"))
    except ValueError:
        n = 1
    return -1 if n <= 0 else n


def periodic_eigenvalues(n: int, h: float) -> np.ndarray:
    """Eigenvalues of ``-D_xx`` on a periodic axis, in FFT order."""
    return (2 - 2 * np.cos(2 * np.pi * np.arange(n) / n)) / h**2


def neumann_eigenvalues(n: int, h: float) -> np.ndarray:
    """Eigenvalues of ``-D_xx`` with reflected ghosts, in DCT-II order."""
    return (2 - 2 * np.cos(np.pi * np.arange(n) / n)) / h**2


def pinned_time_basis(n_t: int, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of ``-D_tt`` restricted to slices ``1..n_t-1``.

    Slice 0 is a homogeneous Dirichlet value and the last slice keeps the
    reflected ghost.
    """
    m = n_t - 1
    diag = np.full(m, 2.0)
    diag[-1] = 1.0
    lam, vec = eigh_tridiagonal(diag, -np.ones(m - 1))
    return lam / dt**2, vec


@dataclass(frozen=True)
class HelmholtzSolver:
    """Precomputed symbol of ``(I - D_tt - sum_d D_dd)^{-1}``.

    Attributes
    ----------
    grid : Grid
    time_bc : {"neumann", "pinned"}
    symbol : ndarray
        Multipliers ``1 / (1 + lambda_t + sum_d lambda_d)`` per mode, all in
        ``(0, 1]``.
    time_basis : ndarray or None
        Orthonormal eigenvectors of the pinned time operator.
    """

    grid: Grid
    time_bc: str
    symbol: np.ndarray
    time_basis: Optional[np.ndarray] = None

    def apply(self, residual: np.ndarray) -> np.ndarray:
        return apply(self, residual)


def build(grid: Grid, time_bc: str = "neumann") -> HelmholtzSolver:
    """Set up the spectral solver for ``grid``.

    Parameters
    ----------
    grid : Grid
    time_bc : {"neumann", "pinned"}
        ``"neumann"`` inverts the operator on all slices with reflected
        ghosts at both ends.  ``"pinned"`` inverts it on slices ``k >= 1``
        with slice 0 held at zero, which is the update space of ``phi``.
    """
    if min(grid.shape) < 3:
        raise ValueError("every axis needs at least 3 points")
    basis = None
    if time_bc == "neumann":
        lam_t = neumann_eigenvalues(grid.n_t, grid.dt)
    elif time_bc == "pinned":
        lam_t, basis = pinned_time_basis(grid.n_t, grid.dt)
    else:
        raise ValueError(f"unknown time boundary treatment {time_bc!r}")

    lam = [lam_t]
    for n, h, bc in zip(grid.n_space, grid.dx, grid.bc):
        lam.append(periodic_eigenvalues(n, h) if bc == "periodic" else neumann_eigenvalues(n, h))
    total = np.zeros([len(v) for v in lam])
    for ax, v in enumerate(lam):
        shape = [1] * len(lam)
        shape[ax] = len(v)
        total = total + v.reshape(shape)
    symbol = 1.0 / (1.0 + total)
    symbol.setflags(write=False)
    return HelmholtzSolver(grid, time_bc, symbol, basis)


def apply(solver: HelmholtzSolver, residual: np.ndarray) -> np.ndarray:
    """Solve ``(I - D_tt - sum_d D_dd) u = residual``.

    For the pinned variant, slice 0 of ``residual`` is ignored and slice 0
    of the result is zero.
    """
    grid = solver.grid
    r = np.asarray(residual, dtype=float)
    if r.shape != grid.shape:
        raise ValueError(f"residual of shape {r.shape} does not match grid {grid.shape}")
    workers = _workers()
    pinned = solver.time_bc == "pinned"
    u = r[1:] if pinned else r

    neumann_axes = [1 + d for d, bc in enumerate(grid.bc) if bc == "neumann"]
    periodic_axes = [1 + d for d, bc in enumerate(grid.bc) if bc == "periodic"]

    # real transforms first, then the complex FFT over the periodic axes
    if pinned:
        u = np.tensordot(solver.time_basis.T, u, axes=(1, 0))
    else:
        u = fft.dct(u, type=2, axis=0, norm="ortho", workers=workers)
    if neumann_axes:
        u = fft.dctn(u, type=2, axes=neumann_axes, norm="ortho", workers=workers)
    if periodic_axes:
        # real input: the half spectrum along the last periodic axis suffices
        last = periodic_axes[-1]
        n_last = u.shape[last]
        half = [slice(None)] * u.ndim
        half[last] = slice(0, n_last // 2 + 1)
        symbol = solver.symbol[tuple(half)]
        shape = [u.shape[ax] for ax in periodic_axes]
        u = fft.rfftn(u, axes=periodic_axes, workers=workers)
        u = fft.irfftn(u * symbol, s=shape, axes=periodic_axes, workers=workers)
    else:
        u = u * solver.symbol
    if neumann_axes:
        u = fft.idctn(u, type=2, axes=neumann_axes, norm="ortho", workers=workers)
    if pinned:
        out = np.zeros_like(r)
        out[1:] = np.tensordot(solver.time_basis, u, axes=(1, 0))
        return out
    return fft.idct(u, type=2, axis=0, norm="ortho", workers=workers)
