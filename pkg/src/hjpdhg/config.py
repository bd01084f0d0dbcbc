"""JSON run configuration.

A configuration file has four sections::

    {
      "problem": {
        "dimension": 1,
        "domain": [[0, 2]],
        "bc": ["periodic"],
        "dynamics": "quadratic_xdep",
        "terminal_cost": {"name": "sin_pi"},
        "lagrangian": {"kind": "quadratic"},
        "epsilon": 0.0
      },
      "grid": {"n_x": 160, "n_t": 41, "T": 1.0},
      "pdhg": {"tol": 1e-6},
      "output": "runs/quadratic"
    }

``dynamics`` is either a preset name (see :func:`catalog.dynamics_preset`)
or a list with one ``{"coeff": ..., "drift": ...}`` entry per dimension,
each of which is ``null`` or ``{"name": ..., "params": {...}}`` naming a
function of :data:`catalog.COEFFICIENTS`.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import catalog
from .grid import Grid
from .pdhg import PdhgConfig
from .problem import AffineDynamics, ControlProblem, Lagrangian


class ConfigError(ValueError):
    """Malformed or invalid configuration; the message lists field paths."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)


class CatalogRef(_Strict):
    name: str
    params: dict[str, float] = Field(default_factory=dict)


class Coefficient(CatalogRef):
    @field_validator("name")
    @classmethod
    def _known(cls, v):
        if v not in catalog.COEFFICIENTS:
            raise ValueError(f"unknown coefficient {v!r}; choose from {sorted(catalog.COEFFICIENTS)}")
        return v


class TerminalCost(CatalogRef):
    @field_validator("name")
    @classmethod
    def _known(cls, v):
        if v not in catalog.TERMINAL_COSTS:
            raise ValueError(
                f"unknown terminal cost {v!r}; choose from {sorted(catalog.TERMINAL_COSTS)}"
            )
        return v


class DimensionDynamics(_Strict):
    coeff: Optional[Coefficient] = None
    drift: Optional[Coefficient] = None


class LagrangianSpec(_Strict):
    kind: Literal["quadratic", "box_indicator"] = "quadratic"
    weight: float = Field(1.0, gt=0)
    radius: float = Field(1.0, gt=0)


class ProblemSpec(_Strict):
    dimension: Literal[1, 2] = 1
    domain: list[tuple[float, float]]
    bc: list[Literal["periodic", "neumann"]]
    dynamics: Union[Literal["quadratic_xdep", "newton", "zero"], list[DimensionDynamics]]
    terminal_cost: TerminalCost
    lagrangian: LagrangianSpec = Field(default_factory=LagrangianSpec)
    epsilon: float = Field(0.0, ge=0)

    @model_validator(mode="after")
    def _lengths(self):
        n = self.dimension
        if len(self.domain) != n or len(self.bc) != n:
            raise ValueError(f"domain and bc need {n} entries")
        if isinstance(self.dynamics, list) and len(self.dynamics) != n:
            raise ValueError(f"dynamics needs {n} entries")
        return self


class GridSpec(_Strict):
    n_x: int = Field(ge=3)
    n_y: Optional[int] = Field(None, ge=3)
    n_t: int = Field(ge=3)
    T: float = Field(1.0, gt=0)


class PdhgSpec(_Strict):
    tau_rho: Optional[float] = Field(None, gt=0)
    tau_alpha: Optional[float] = Field(None, gt=0)
    tau_phi: Optional[float] = Field(None, gt=0)
    c: float = Field(1.0, gt=0)
    n_inner: int = Field(1, ge=1)
    max_outer: int = Field(200_000, ge=1)
    tol: float = Field(1e-6, gt=0)
    windows: int = Field(1, ge=1)
    rho_floor: float = Field(1e-6, gt=0)
    check_every: int = Field(10, ge=1)
    time_limit: Optional[float] = Field(None, gt=0)
    step_scale: float = Field(0.7, gt=0)
    primal_weight: float = Field(10**0.5, gt=0)


class RunConfig(_Strict):
    problem: ProblemSpec
    grid: GridSpec
    pdhg: PdhgSpec = Field(default_factory=PdhgSpec)
    output: Optional[str] = None

    @model_validator(mode="after")
    def _grid(self):
        try:
            self.build_grid()
        except ValueError as err:
            raise ValueError(f"grid: {err}") from None
        return self

    def build_grid(self) -> Grid:
        p, g = self.problem, self.grid
        n_space = [g.n_x] if p.dimension == 1 else [g.n_x, g.n_y]
        if p.dimension == 2 and g.n_y is None:
            raise ValueError("grid.n_y is required in two dimensions")
        return Grid(p.domain, n_space, g.n_t, g.T, p.bc)

    def build_problem(self) -> ControlProblem:
        p = self.problem
        dims = p.dimension
        if isinstance(p.dynamics, str):
            dynamics = catalog.dynamics_preset(p.dynamics, dims)
        else:
            coeff, drift = [], []
            for d, entry in enumerate(p.dynamics):
                for ref, out in ((entry.coeff, coeff), (entry.drift, drift)):
                    out.append(None if ref is None else catalog.COEFFICIENTS[ref.name](d, **ref.params))
            dynamics = AffineDynamics(coeff, drift)
        g = catalog.TERMINAL_COSTS[p.terminal_cost.name](**p.terminal_cost.params)
        lag = Lagrangian(p.lagrangian.kind, p.lagrangian.weight, p.lagrangian.radius)
        return ControlProblem(self.build_grid(), dynamics, lag, g, p.epsilon)

    def pdhg_config(self) -> PdhgConfig:
        return PdhgConfig(**self.pdhg.model_dump())


def _describe(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(v) for v in e["loc"]) or "<root>"
        lines.append(f"{path}: {e['msg']}")
    return "; ".join(lines)


def load_config(data: dict) -> RunConfig:
    """Validate a decoded configuration and build its problem once."""
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_describe(err)) from None
    try:
        cfg.build_problem()
    except (TypeError, ValueError) as err:
        raise ConfigError(f"problem: {err}") from None
    return cfg


def parse_config(path) -> RunConfig:
    """Read and validate a JSON configuration file.

    Raises
    ------
    ConfigError
        On malformed JSON, unknown keys or catalog names, non-finite numbers
        or an invalid grid.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: malformed JSON ({err})") from None
    return load_config(data)
