import numpy as np
import pytest
from hypothesis import given, strategies as st

from olab.grid import DyadicGrid, GridFunction
from olab.maximal import (m_gamma_phi, m_phi_dyadic, naive_maximal, naive_maximal_scalar,
                          sawyer_quotients)
from olab.young import ParameterError, make_canonical

PHIS = [make_canonical(1.0, 0.0), make_canonical(1.0, 1.0), make_canonical(2.0, 0.5)]


@st.composite
def grid_functions(draw, max_cells_log=6):
    n = draw(st.sampled_from([1, 2]))
    L = draw(st.integers(0, max_cells_log // n))
    grid = DyadicGrid(n, L)
    vals = draw(st.lists(st.floats(0.0, 1e3), min_size=grid.num_cells, max_size=grid.num_cells))
    return GridFunction(grid, vals)


@given(grid_functions(), st.sampled_from(range(len(PHIS))))
def test_fast_equals_batched_oracle(f, i):
    res = m_phi_dyadic(f, PHIS[i])
    vals, lvl = naive_maximal(f, PHIS[i])
    assert np.array_equal(res.values, vals)
    assert np.array_equal(res.argmax_level, lvl)


@given(grid_functions(max_cells_log=4), st.sampled_from(range(len(PHIS))))
def test_fast_equals_scalar_oracle(f, i):
    res = m_phi_dyadic(f, PHIS[i])
    vals, lvl = naive_maximal_scalar(f, PHIS[i])
    assert np.array_equal(res.values, vals)


@given(grid_functions(), st.floats(0.05, 0.95))
def test_fractional_equals_oracle(f, frac):
    gamma = frac * f.grid.n
    phi = PHIS[1]
    assert np.array_equal(m_gamma_phi(f, phi, gamma).values, naive_maximal(f, phi, gamma)[0])


@given(grid_functions())
def test_dominates_function(f):
    # with Phi(1) = 1 the norm over a single cell is the cell value
    for phi in PHIS:
        assert (m_phi_dyadic(f, phi).values >= f.values * (1 - 1e-12)).all()


@given(grid_functions(), st.floats(1e-3, 1e3))
def test_homogeneous(f, lam):
    phi = PHIS[1]
    assert np.allclose(m_phi_dyadic(f * lam, phi).values, lam * m_phi_dyadic(f, phi).values,
                       rtol=1e-10)


def test_argmax_cube_attains(rng):
    grid = DyadicGrid(1, 6)
    f = GridFunction(grid, rng.random(64))
    res = m_phi_dyadic(f, PHIS[0])
    for c in range(grid.num_cells):
        Q = res.argmax_cube(c)
        assert grid.cell_of(c).ancestor(Q.level) == Q
        assert res.values[c] == pytest.approx(f.values[grid.cells_in(Q)].mean())


def test_gamma_range():
    f = GridFunction.constant(DyadicGrid(1, 2), 1.0)
    with pytest.raises(ParameterError):
        m_gamma_phi(f, PHIS[0], 1.0)


@given(grid_functions(), st.lists(st.floats(0.01, 100), min_size=64, max_size=64))
def test_sawyer_T_bounded_by_sup(f, w):
    v = GridFunction(f.grid, w[: f.grid.num_cells])
    _, T = sawyer_quotients(f, None, v, PHIS[0])
    assert (T.values <= f.values.max() * (1 + 1e-9)).all()
