import math

import numpy as np
import pytest

from nlkg.errors import CenterOutOfDomain
from nlkg.field import (Dichotomy, FieldState, Grid1D, blowup_criterion,
                        discrete_soliton, dump_text, functionals, h_norm_sq,
                        load_state, save_state, subcritical_dichotomy, superpose)


@pytest.fixture(scope="module")
def q_state(gs1, spec05, grid02):
    return superpose(gs1, spec05, [1.0], [0.0], [0.0], grid02)


def test_zero_state(grid05):
    z = FieldState(grid05, np.zeros(grid05.n), np.zeros(grid05.n))
    f = functionals(z, 3.0, 0.5)
    assert f.energy == f.nehari == f.p_func == f.h_norm_sq == 0.0
    assert not blowup_criterion(f, 3.0, 0.5)


def test_ground_state_functionals(q_state):
    f = functionals(q_state, 3.0, 0.5)
    assert abs(f.energy - 4.0 / 3.0) <= 2e-4
    assert abs(f.nehari) <= 1e-8          # discrete stationarity kills K0 exactly
    assert abs(f.p_func - 0.5 * 4.0) <= 2e-4


def test_scaled_state_functionals(q_state):
    grid = q_state.grid
    f2 = functionals(FieldState(grid, 2.0 * q_state.u, np.zeros(grid.n)), 3.0, 0.5)
    assert abs(f2.energy + 32.0 / 3.0) <= 2e-3
    assert abs(f2.nehari + 64.0) <= 5e-3
    assert blowup_criterion(f2, 3.0, 0.5)
    fq = functionals(q_state, 3.0, 0.5)
    assert not blowup_criterion(fq, 3.0, 0.5)


def test_nehari_scaling_identity(q_state):
    grid = q_state.grid
    dx = grid.dx
    lp1 = float(np.trapezoid(q_state.u ** 4, dx=dx))
    for lam in (0.5, 1.0, 2.0):
        f = functionals(FieldState(grid, lam * q_state.u, np.zeros(grid.n)), 3.0, 0.5)
        target = (lam ** 2 - lam ** 4) * lp1
        assert abs(f.nehari - target) <= 1e-6 * max(1.0, abs(target))


def test_subcritical_dichotomy(q_state, gs1):
    grid = q_state.grid
    half = functionals(FieldState(grid, 0.5 * q_state.u, np.zeros(grid.n)), 3.0, 0.5)
    assert subcritical_dichotomy(half, gs1.energy) is Dichotomy.DECAY_CERTIFIED
    dbl = functionals(FieldState(grid, 2.0 * q_state.u, np.zeros(grid.n)), 3.0, 0.5)
    assert subcritical_dichotomy(dbl, gs1.energy) is Dichotomy.BLOWUP_SIDE
    fq = functionals(q_state, 3.0, 0.5)
    assert subcritical_dichotomy(fq, gs1.energy) is Dichotomy.INCONCLUSIVE


def test_quadrature_second_order(gs1, spec05):
    vals = []
    for dx in (0.08, 0.04):
        grid = Grid1D.make(60.0, dx)
        u = np.sqrt(2.0) / np.cosh(grid.x)   # sampled analytic profile
        f = functionals(FieldState(grid, u, np.zeros(grid.n)), 3.0, 0.5)
        vals.append(abs(f.energy - 4.0 / 3.0))
    assert vals[0] / vals[1] > 3.0  # O(dx^2)


def test_superpose_two_solitons(gs1, spec05, grid05):
    st = superpose(gs1, spec05, [1, -1], [-8.0, 8.0], [0, 0], grid05)
    f = functionals(st, 3.0, 0.5)
    from nlkg.groundstate import eta0
    assert abs(f.energy - 2.0 * 4.0 / 3.0) <= 10.0 * eta0(gs1, 16.0) + 1e-3


def test_superpose_mode_amplitudes(gs1, spec05, grid05, basis05):
    from nlkg.modulation import project
    st = superpose(gs1, spec05, [1, -1], [-8.0, 8.0], [0.02, -0.01], grid05)
    v = (st.u - basis05.q_sum([1, -1], [-8.0, 8.0]), st.udot)
    assert abs(project(basis05, v, "+", -8.0) - 0.02) < 1e-6
    assert abs(project(basis05, v, "+", 8.0) - (-1) * (-0.01)) < 1e-6


def test_superpose_rejects_bad_centers(gs1, spec05, grid05):
    with pytest.raises(CenterOutOfDomain):
        superpose(gs1, spec05, [1], [55.0], [0.0], grid05)
    with pytest.raises(CenterOutOfDomain):
        superpose(gs1, spec05, [1, -1], [0.0, 3.0], [0, 0], grid05)


def test_discrete_soliton_residual(gs1, grid05):
    u = discrete_soliton(gs1, grid05, 5.0)
    dx = grid05.dx
    lap = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx ** 2
    res = lap - u[1:-1] + np.abs(u[1:-1]) ** 2 * u[1:-1]
    assert np.max(np.abs(res)) < 1e-10
    off = discrete_soliton(gs1, grid05, 5.013)   # off-grid center: sampled Q
    assert np.allclose(off, gs1.line_values(grid05.x, 5.013))


def test_serialization_roundtrip(tmp_path, q_state):
    path = tmp_path / "state.bin"
    save_state(q_state, path)
    back = load_state(path)
    assert back.grid.n == q_state.grid.n
    assert back.time == q_state.time
    assert np.array_equal(back.u, q_state.u)
    assert np.array_equal(back.udot, q_state.udot)
    txt = tmp_path / "state.txt"
    dump_text(q_state, txt)
    data = np.loadtxt(txt)
    assert data.shape == (q_state.grid.n, 2)


def test_h_norm_matches_functionals(q_state):
    f = functionals(q_state, 3.0, 0.5)
    assert abs(h_norm_sq(q_state) - f.h_norm_sq) < 1e-12
