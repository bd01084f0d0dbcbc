"""CSV and JSON serialization of grid fields, trajectories and run metadata.

Grid fields are written in long form with 1-based indices, one row per
node::

    k,i,j,value

Values use 17 significant digits, so reading a file back with
:func:`read_field` reproduces the array bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .trajectory import TrajectoryResult

FMT = "%.17g"


def write_field(path, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=float)
    names = ["k", "i", "j"][: values.ndim]
    idx = np.indices(values.shape).reshape(values.ndim, -1).T + 1
    table = np.column_stack([idx, values.ravel()])
    np.savetxt(
        path, table, delimiter=",", header=",".join(names + ["value"]), comments="",
        fmt=["%d"] * values.ndim + [FMT],
    )


def read_field(path) -> np.ndarray:
    """Inverse of :func:`write_field`."""
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    idx = table[:, :-1].astype(int) - 1
    shape = tuple(idx.max(axis=0) + 1)
    out = np.full(shape, np.nan)
    out[tuple(idx.T)] = table[:, -1]
    return out


def write_trajectory(path, result: TrajectoryResult) -> None:
    dims = result.states.shape[1]
    n_ctrl = result.controls.shape[1]
    header = ["s"] + [f"gamma_{d + 1}" for d in range(dims)]
    header += [f"alpha_{d + 1}" for d in range(n_ctrl)]
    table = np.column_stack([result.times, result.states, result.controls])
    np.savetxt(path, table, delimiter=",", header=",".join(header), comments="", fmt=FMT)


def read_trajectory(path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
