"""Shared solves; the expensive ones are computed once per session."""

import numpy as np
import pytest

from hjpdhg.catalog import example_problem
from hjpdhg.pdhg import PdhgConfig, solve


@pytest.fixture(scope="session")
def quadratic_fine():
    """Quadratic example on the 160 x 41 grid, solved to 1e-6."""
    problem = example_problem("quadratic", 160, 41)
    state, report = solve(problem, PdhgConfig(tol=1e-6))
    return problem, state, report


@pytest.fixture(scope="session")
def quadratic_coarse():
    """Quadratic example on the 40 x 11 grid, solved to 1e-6."""
    problem = example_problem("quadratic", 40, 11)
    state, report = solve(problem, PdhgConfig(tol=1e-6))
    return problem, state, report


@pytest.fixture(scope="session")
def box_coarse():
    """Box-constrained example on the 40 x 11 grid, solved to 1e-6."""
    problem = example_problem("box", 40, 11)
    state, report = solve(problem, PdhgConfig(tol=1e-6, max_outer=400_000))
    return problem, state, report


@pytest.fixture(scope="session")
def box_long_horizon():
    """Box-constrained example on 160 x 41 with T = 4, fixed iteration budget.

    T = 4 exceeds the travel time to the minimizer x = 1.5 from every
    starting point (at most about 3.2).
    """
    problem = example_problem("box", 160, 41, T=4.0)
    state, report = solve(problem, PdhgConfig(tol=1e-6, max_outer=60_000))
    return problem, state, report


def bang_fraction(state, tol=1e-2):
    values = np.concatenate([a.ravel() for _, _, _, a in state.branches()])
    dist = np.min(np.abs(values[:, None] - np.array([-1.0, 0.0, 1.0])), axis=1)
    return float(np.mean(dist <= tol))
