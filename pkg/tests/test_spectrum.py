import math

import numpy as np
import pytest

from nlkg.errors import GridMismatch
from nlkg.groundstate import solve_ground_state
from nlkg.spectrum import (MODE_TAGS, assemble_eigenmodes, eigen_residual,
                           kernel_residual, solve_internal_mode, symplectic_pair)


def test_poschl_teller_eigenvalue(gs1, mode1):
    nu0, phi = mode1
    assert abs(nu0 ** 2 - 3.0) <= 1e-6
    assert abs(phi.at(0.0) - math.sqrt(3.0) / 2.0) <= 1e-4


def test_eigen_residual_small(gs1, spec05):
    assert eigen_residual(spec05) <= 1e-6


def test_kernel_residual(gs1, mode1):
    _, phi = mode1
    h = phi.r[1] - phi.r[0]
    assert kernel_residual(gs1, phi.r) <= 10.0 * h ** 2


def test_translation_mode_orthogonal_to_phi(gs1, spec05, grid05):
    x = grid05.x
    ph = spec05.phi.line_values(x)
    dq = gs1.line_slope(x)
    assert abs(np.trapezoid(ph * dq, dx=grid05.dx)) <= 1e-10


def test_eigenvalue_grid_refinement(gs1):
    vals = [solve_internal_mode(gs1, m_grid=m)[0] ** 2
            for m in (2 ** 13, 2 ** 14, 2 ** 15)]
    d_coarse = vals[0] - vals[1]
    d_fine = vals[1] - vals[2]
    ratio = d_coarse / d_fine
    assert 2.5 <= ratio <= 6.0  # second-order stencil: ~4


def test_damped_eigenvalue_algebra(spec05):
    root = math.sqrt(0.25 + spec05.nu0 ** 2)
    assert abs(spec05.nu_plus - (-0.5 + root)) < 1e-14
    assert abs(spec05.nu_minus - (-0.5 - root)) < 1e-14
    rel = abs(spec05.nu_plus * spec05.nu_minus + spec05.nu0 ** 2) / spec05.nu0 ** 2
    assert rel <= 1e-12
    assert abs(spec05.nu_plus - 1.30277564) < 1e-6
    assert abs(spec05.c_omega_plus - 3.60555128) < 1e-6
    assert abs(spec05.c_omega_plus + spec05.c_omega_minus) < 1e-14
    assert abs(spec05.c_omega_1 - 4.0 / 3.0) < 1e-9


def test_symplectic_form_antisymmetric(spec05, grid05):
    f = spec05.y_mode("+", grid05.x, 1.0)
    g = spec05.y_mode("1", grid05.x, -2.0)
    assert symplectic_pair(f, f, grid05.dx) == 0.0
    assert abs(symplectic_pair(f, g, grid05.dx)
               + symplectic_pair(g, f, grid05.dx)) < 1e-14


def test_pairing_constants_discrete(spec05, grid05):
    x, dx = grid05.x, grid05.dx
    yp = spec05.y_mode("+", x)
    assert abs(symplectic_pair(yp, spec05.ybar_mode("+", x), dx)
               - spec05.c_omega_plus) <= 1e-8
    assert abs(symplectic_pair(yp, spec05.ybar_mode("-", x), dx)) <= 1e-8
    y1 = spec05.y_mode("1", x)
    assert abs(symplectic_pair(y1, spec05.ybar_mode("1", x), dx)
               - spec05.c_omega_1) <= 1e-8 * spec05.c_omega_1


def test_biorthogonality_matrix(spec05, grid05):
    x, dx = grid05.x, grid05.dx
    m = np.empty((4, 4))
    for i, ti in enumerate(MODE_TAGS):
        yi = spec05.y_mode(ti, x)
        for j, tj in enumerate(MODE_TAGS):
            m[i, j] = symplectic_pair(yi, spec05.ybar_mode(tj, x), dx)
    off = m - np.diag(np.diag(m))
    assert np.max(np.abs(off)) <= 1e-6
    for i, tag in enumerate(MODE_TAGS):
        assert abs(m[i, i] - spec05.c_omega(tag)) <= 1e-6


def test_grid_mismatch_raises(spec05, grid05):
    f = spec05.y_mode("+", grid05.x)
    g = (f[0][:-1], f[1][:-1])
    with pytest.raises(GridMismatch):
        symplectic_pair(f, g, grid05.dx)


def test_radial_internal_mode_n2():
    gs = solve_ground_state(2, 3.0, tol=1e-10)
    nu0, phi = solve_internal_mode(gs, m_grid=2 ** 15)
    spec = assemble_eigenmodes(nu0, phi, gs, 0.5)
    assert nu0 > 0
    assert eigen_residual(spec) <= 1e-5
    # lowest eigenvalue sits below the edge of the essential spectrum
    assert nu0 ** 2 > 1.0
