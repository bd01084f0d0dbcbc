"""Command-line interface.

::

    hjpdhg solve --config run.json --out DIR [--windows N]
    hjpdhg trajectories --solution DIR --x0 0.5 --x0 1.0 --steps 400 [--seed S] [--t0 V]
    hjpdhg check --config run.json --samples 1000
    hjpdhg compare --config run.json --cfl 0.9 --out DIR

Exit status is 0 on success, 2 when a solve stops before reaching the
tolerance and 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_config, parse_config
from .export import read_field, write_field, write_json, write_trajectory
from .oracle import compare, explicit_solve
from .pdhg import SolverState, solve
from .problem import check_consistency, check_monotonicity
from .trajectory import integrate_ode, integrate_sde

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2


class CliError(RuntimeError):
    pass


def _summary(report) -> str:
    hj, prox, cont = report.final_residuals
    status = "converged" if report.converged else "not converged"
    return (
        f"{status}: {report.outer_iterations} iterations, residuals "
        f"hj={hj:.3e} prox={prox:.3e} continuity={cont:.3e}, {report.wall_time:.1f} s"
    )


def _metadata(cfg, problem, report) -> dict:
    grid = problem.grid
    history = np.column_stack([report.iterations, report.residual_history])
    return {
        "version": __version__,
        "config": cfg.model_dump(mode="json"),
        "grid": {
            "domain": [list(v) for v in grid.domain],
            "n_space": list(grid.n_space),
            "n_t": grid.n_t,
            "T": grid.T,
            "bc": list(grid.bc),
            "dx": list(grid.dx),
            "dt": grid.dt,
        },
        "step_sizes": {k: float(v) for k, v in report.step_sizes.items()},
        "converged": report.converged,
        "outer_iterations": report.outer_iterations,
        "wall_time": report.wall_time,
        "residual_history": {
            "columns": ["iteration", "hj", "prox", "continuity"],
            "rows": history.tolist(),
        },
    }


def write_solution(out: Path, cfg, problem, state: SolverState, report) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_field(out / "phi.csv", state.phi)
    write_field(out / "rho.csv", state.rho)
    for name, _, _, alpha in state.branches():
        write_field(out / f"alpha_{name}.csv", alpha)
    write_json(out / "metadata.json", _metadata(cfg, problem, report))


def read_solution(directory: Path):
    """Rebuild the problem and solver state stored by ``solve``."""
    meta_path = directory / "metadata.json"
    if not meta_path.is_file() or not (directory / "phi.csv").is_file():
        raise CliError(f"solution not found in {directory}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    cfg = load_config(meta["config"])
    problem = cfg.build_problem()
    phi = read_field(directory / "phi.csv")
    rho = read_field(directory / "rho.csv")
    up, down = {}, {}
    for d in problem.dynamics.control_axes:
        up[d] = read_field(directory / f"alpha_{d + 1}_up.csv")
        down[d] = read_field(directory / f"alpha_{d + 1}_down.csv")
    c = cfg.pdhg.c
    return cfg, problem, SolverState(phi, phi.copy(), rho, up, down, c)


def cmd_solve(args) -> int:
    cfg = parse_config(args.config)
    if args.windows is not None:
        cfg = cfg.model_copy(update={"pdhg": cfg.pdhg.model_copy(update={"windows": args.windows})})
        cfg = load_config(cfg.model_dump(mode="json"))
    out = Path(args.out or cfg.output or ".")
    problem = cfg.build_problem()
    state, report = solve(problem, cfg.pdhg_config())
    write_solution(out, cfg, problem, state, report)
    print(_summary(report))
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _point(text: str, dims: int) -> list[float]:
    values = [float(v) for v in text.split(",")]
    if len(values) != dims:
        raise CliError(f"--x0 {text!r} needs {dims} coordinate(s)")
    return values


def cmd_trajectories(args) -> int:
    directory = Path(args.solution)
    cfg, problem, state = read_solution(directory)
    points = [_point(v, problem.dims) for v in args.x0]
    for n, x0 in enumerate(points, start=1):
        if problem.epsilon > 0:
            seed = None if args.seed is None else args.seed + n - 1
            path = integrate_sde(state, problem, x0, args.t0, args.steps, seed=seed)
        else:
            path = integrate_ode(state, problem, x0, args.t0, args.steps)
        write_trajectory(directory / f"traj_{n}.csv", path)
        end = ", ".join(f"{v:.6g}" for v in path.states[-1])
        print(f"traj_{n}: x0=({', '.join(f'{v:g}' for v in x0)}) -> ({end})")
    return EXIT_OK


def cmd_check(args) -> int:
    problem = parse_config(args.config).build_problem()
    cons = check_consistency(problem, args.samples)
    mono = check_monotonicity(problem, args.samples)
    print(
        f"max_deviation={cons.max_deviation:.3e} "
        f"monotonicity_violations={mono.violations}/{mono.probes}"
    )
    ok = cons.max_deviation <= 1e-9 and mono.violations == 0
    return EXIT_OK if ok else EXIT_ERROR


def cmd_compare(args) -> int:
    cfg = parse_config(args.config)
    problem = cfg.build_problem()
    state, report = solve(problem, cfg.pdhg_config())
    reference = explicit_solve(problem, args.cfl)
    rep = compare(state.phi, reference)
    out = Path(args.out)
    write_solution(out, cfg, problem, state, report)
    write_field(out / "explicit.csv", reference)
    write_json(out / "comparison.json", {
        "l_inf": rep.l_inf, "l2": rep.l2, "worst_time_index": rep.worst_time_index + 1,
        "cfl": args.cfl,
    })
    print(_summary(report))
    print(f"l_inf={rep.l_inf:.6e} l2={rep.l2:.6e} worst_k={rep.worst_time_index + 1}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hjpdhg", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the PDHG solver and write the fields")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--windows", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("trajectories", help="integrate optimal paths from a solution")
    p.add_argument("--solution", required=True)
    p.add_argument("--x0", action="append", required=True, help="comma-separated point")
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--t0", type=float, default=0.0)
    p.set_defaults(func=cmd_trajectories)

    p = sub.add_parser("check", help="consistency and monotonicity of the numerical Hamiltonian")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compare", help="compare PDHG with the explicit reference scheme")
    p.add_argument("--config", required=True)
    p.add_argument("--cfl", type=float, default=0.9)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
