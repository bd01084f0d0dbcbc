import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjpdhg import precond
from hjpdhg.grid import Grid, diff_space, diff_time


def dense_operator(grid):
    """Assemble I - D_tt - sum_d D_dd column by column from the stencils."""
    n = int(np.prod(grid.shape))
    cols = []
    for e in np.eye(n):
        u = e.reshape(grid.shape)
        out = u - diff_time(u, grid, "second")
        for d in range(grid.dims):
            out = out - diff_space(u, grid, d, "second")
        cols.append(out.ravel())
    return np.array(cols).T


def test_periodic_eigenvalues_example():
    np.testing.assert_allclose(precond.periodic_eigenvalues(4, 0.5), [0, 8, 16, 8], atol=1e-12)


def test_neumann_time_eigenvalues():
    # reflected ghosts equal to the boundary value: DCT-II spectrum
    np.testing.assert_allclose(precond.neumann_eigenvalues(3, 1.0), [0, 1, 3], atol=1e-12)
    g = Grid([(0.0, 1.0)], [3], 3, 2.0, ["neumann"])
    # space-constant fields isolate -D_tt
    cols = [-diff_time(np.outer(e, np.ones(3)), g, "second")[:, 0] for e in np.eye(3)]
    lam = np.linalg.eigvalsh(np.array(cols).T)
    np.testing.assert_allclose(np.sort(lam), [0, 1, 3], atol=1e-12)


def test_symbol_range_and_constant_mode():
    g = Grid([(0.0, 1.0), (0.0, 1.0)], [5, 6], 4, 1.0, ["neumann", "periodic"])
    s = precond.build(g)
    assert s.symbol.max() == 1.0 and s.symbol.min() > 0
    assert s.symbol[0, 0, 0] == 1.0
    np.testing.assert_allclose(s.apply(np.ones(g.shape)), 1.0, atol=1e-14)
    np.testing.assert_array_equal(s.apply(np.zeros(g.shape)), 0.0)
    pinned = precond.build(g, "pinned")
    assert 0 < pinned.symbol.min() and pinned.symbol.max() < 1


def test_single_fourier_mode():
    g = Grid([(0.0, 2.0)], [4], 3, 1.0, ["periodic"])
    mode = np.cos(np.pi * g.axis_points(0))  # k = 1 on n = 4, dx = 0.5
    r = np.tile(mode, (3, 1))
    out = precond.build(g).apply(r)
    np.testing.assert_allclose(out, r / 9.0, atol=1e-14)
    dense = np.linalg.solve(dense_operator(g), r.ravel()).reshape(g.shape)
    np.testing.assert_allclose(out, dense, atol=1e-13)


GRIDS = [
    ([(0.0, 1.0)], [12], 12, ["periodic"]),
    ([(0.0, 1.0)], [12], 12, ["neumann"]),
    ([(0.0, 1.0), (0.0, 2.0)], [12, 12], 12, ["periodic", "periodic"]),
    ([(0.0, 1.0), (0.0, 2.0)], [12, 12], 12, ["neumann", "periodic"]),
    ([(0.0, 1.0), (0.0, 2.0)], [7, 9], 5, ["periodic", "neumann"]),
]


@pytest.mark.parametrize("domain, n, n_t, bc", GRIDS)
def test_round_trip_against_dense(domain, n, n_t, bc):
    g = Grid(domain, n, n_t, 0.7, bc)
    M = dense_operator(g)
    rng = np.random.default_rng(1)
    r = rng.standard_normal(g.shape)
    u = precond.build(g).apply(r)
    assert np.max(np.abs(M @ u.ravel() - r.ravel())) <= 1e-10

    # pinned: operator restricted to slices k >= 1 with slice 0 fixed at zero
    u = precond.build(g, "pinned").apply(r)
    assert np.all(u[0] == 0)
    idx = np.arange(M.shape[0]).reshape(g.shape)[1:].ravel()
    sub = M[np.ix_(idx, idx)]
    assert np.max(np.abs(sub @ u[1:].ravel() - r[1:].ravel())) <= 1e-10


def test_shape_mismatch():
    g = Grid([(0.0, 1.0)], [4], 3, 1.0, ["periodic"])
    with pytest.raises(ValueError):
        precond.build(g).apply(np.zeros((3, 5)))
    with pytest.raises(ValueError):
        precond.build(g, "periodic")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(-3, 3), st.floats(-3, 3),
       st.sampled_from(["neumann", "pinned"]))
def test_linearity_and_positivity(seed, a, b, mode):
    g = Grid([(0.0, 1.0), (0.0, 1.0)], [6, 5], 4, 1.0, ["periodic", "neumann"])
    s = precond.build(g, mode)
    rng = np.random.default_rng(seed)
    r1, r2 = rng.standard_normal(g.shape), rng.standard_normal(g.shape)
    lhs = s.apply(a * r1 + b * r2)
    rhs = a * s.apply(r1) + b * s.apply(r2)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12
    assert np.sum(s.apply(r1) * r1) >= 0


def test_threads_env(monkeypatch):
    g = Grid([(0.0, 1.0)], [8], 5, 1.0, ["periodic"])
    r = np.random.default_rng(0).standard_normal(g.shape)
    base = precond.build(g).apply(r)
    monkeypatch.setenv("HJPDHG_THREADS", "0")
    np.testing.assert_allclose(precond.build(g).apply(r), base, atol=1e-15)
