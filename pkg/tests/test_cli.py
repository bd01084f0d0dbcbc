import json
import shutil
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hjpdhg.cli import main
from hjpdhg.config import ConfigError, PdhgSpec, parse_config
from hjpdhg.export import read_field, read_trajectory, write_field
from hjpdhg.pdhg import PdhgConfig

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def minimal(**overrides):
    cfg = {
        "problem": {
            "dimension": 1,
            "domain": [[0, 2]],
            "bc": ["periodic"],
            "dynamics": "quadratic_xdep",
            "terminal_cost": {"name": "sin_pi"},
        },
        "grid": {"n_x": 160, "n_t": 41},
    }
    for key, value in overrides.items():
        section, field = key.split("__")
        cfg[section][field] = value
    return cfg


def write(tmp_path, cfg, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def test_minimal_config_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, minimal()))
    assert cfg.pdhg == PdhgSpec()
    assert cfg.build_problem().grid.shape == (41, 160)
    assert cfg.problem.lagrangian.kind == "quadratic"


def test_spec_defaults_match_solver_defaults():
    assert PdhgConfig(**PdhgSpec().model_dump()) == PdhgConfig()


@pytest.mark.parametrize(
    "overrides, field",
    [
        (dict(problem__lagrangian={"kind": "cubic"}), "problem.lagrangian.kind"),
        (dict(grid__n_t=1), "n_t"),
        (dict(problem__terminal_cost={"name": "cos"}), "problem.terminal_cost.name"),
        (dict(problem__dynamics="pendulum"), "problem.dynamics"),
        (dict(grid__surprise=3), "grid.surprise"),
        (dict(problem__epsilon=float("nan")), "problem.epsilon"),
    ],
)
def test_invalid_configs_name_the_field(tmp_path, overrides, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        parse_config(write(tmp_path, minimal(**overrides)))


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{ not json")
    with pytest.raises(ConfigError, match="malformed"):
        parse_config(path)


def test_shipped_configs_parse():
    for path in sorted(CONFIGS.glob("*.json")):
        parse_config(path).build_problem()


@settings(max_examples=25, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 4), st.integers(1, 5)),
              elements=st.floats(allow_nan=False, allow_infinity=False, width=64)))
def test_field_round_trip_is_bitwise(values):
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "f.csv"
        write_field(path, values)
        back = read_field(path)
    assert back.shape == values.shape
    assert np.array_equal(back.view(np.int64), values.view(np.int64))


def test_field_csv_layout(tmp_path):
    write_field(tmp_path / "f.csv", np.arange(12.0).reshape(2, 3, 2))
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "k,i,j,value"
    assert lines[1] == "1,1,1,0"
    assert lines[-1] == "2,3,2,11"


def test_solve_constant_and_trajectories(tmp_path, capsys):
    out = tmp_path / "const"
    assert main(["solve", "--config", str(CONFIGS / "constant.json"), "--out", str(out)]) == 0
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["converged"] and meta["outer_iterations"] <= 2
    assert {"version", "config", "grid", "step_sizes", "residual_history"} <= set(meta)
    for name in ("phi", "rho", "alpha_1_up", "alpha_1_down"):
        assert (out / f"{name}.csv").is_file()
    assert np.all(read_field(out / "phi.csv") == 3.0)
    assert "converged" in capsys.readouterr().out

    code = main(["trajectories", "--solution", str(out), "--x0", "0.5", "--x0", "1.25",
                 "--steps", "20"])
    assert code == 0
    header, table = read_trajectory(out / "traj_2.csv")
    assert header == ["s", "gamma_1", "alpha_1"]
    assert table.shape == (21, 3)
    np.testing.assert_array_equal(table[:, 1], 1.25)


def test_metadata_reruns_the_solve(tmp_path):
    out = tmp_path / "a"
    main(["solve", "--config", str(CONFIGS / "constant.json"), "--out", str(out), "--windows", "2"])
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["config"]["pdhg"]["windows"] == 2
    again = write(tmp_path, meta["config"], "again.json")
    assert main(["solve", "--config", str(again), "--out", str(tmp_path / "b")]) == 0
    np.testing.assert_array_equal(read_field(out / "phi.csv"), read_field(tmp_path / "b" / "phi.csv"))


def test_non_convergence_exit_code(tmp_path):
    cfg = json.loads((CONFIGS / "quadratic.json").read_text())
    cfg["grid"] = {"n_x": 20, "n_t": 6, "T": 1.0}
    cfg["pdhg"] = {"max_outer": 5}
    path = write(tmp_path, cfg)
    assert main(["solve", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_trajectories_without_solution(tmp_path, capsys):
    code = main(["trajectories", "--solution", str(tmp_path / "missing"), "--x0", "0.5"])
    assert code == 1
    assert "solution not found" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path, capsys):
    path = write(tmp_path, minimal(problem__lagrangian={"kind": "cubic"}))
    assert main(["solve", "--config", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "lagrangian" in capsys.readouterr().err


def test_check_quadratic(capsys):
    assert main(["check", "--config", str(CONFIGS / "quadratic.json"), "--samples", "1000"]) == 0
    line = capsys.readouterr().out
    deviation = float(line.split("max_deviation=")[1].split()[0])
    assert deviation <= 1e-9


def test_compare_small(tmp_path, capsys):
    cfg = json.loads((CONFIGS / "quadratic.json").read_text())
    cfg["grid"] = {"n_x": 40, "n_t": 11, "T": 1.0}
    path = write(tmp_path, cfg)
    out = tmp_path / "cmp"
    assert main(["compare", "--config", str(path), "--cfl", "0.9", "--out", str(out)]) == 0
    rep = json.loads((out / "comparison.json").read_text())
    assert 0 < rep["l_inf"] <= 0.14
    assert read_field(out / "explicit.csv").shape == (11, 40)


def test_sde_trajectories_reproducible(tmp_path):
    cfg = json.loads((CONFIGS / "constant.json").read_text())
    cfg["problem"]["epsilon"] = 0.2
    path = write(tmp_path, cfg)
    out = tmp_path / "visc"
    assert main(["solve", "--config", str(path), "--out", str(out)]) == 0
    runs = []
    for _ in range(2):
        main(["trajectories", "--solution", str(out), "--x0", "1.0", "--seed", "4"])
        runs.append((out / "traj_1.csv").read_bytes())
    assert runs[0] == runs[1]
    shutil.rmtree(out)
