import numpy as np
import pytest

from nlkg.field import Grid1D
from nlkg.groundstate import solve_ground_state
from nlkg.modulation import SolitonBasis
from nlkg.spectrum import assemble_eigenmodes, solve_internal_mode


@pytest.fixture(scope="session")
def gs1():
    return solve_ground_state(1, 3.0, tol=1e-13)


@pytest.fixture(scope="session")
def mode1(gs1):
    return solve_internal_mode(gs1)


@pytest.fixture(scope="session")
def spec05(gs1, mode1):
    nu0, phi = mode1
    return assemble_eigenmodes(nu0, phi, gs1, 0.5)


@pytest.fixture(scope="session")
def grid05():
    return Grid1D.make(60.0, 0.05)


@pytest.fixture(scope="session")
def grid02():
    return Grid1D.make(60.0, 0.02)


@pytest.fixture(scope="session")
def basis05(gs1, spec05, grid05):
    return SolitonBasis(gs1, spec05, grid05)


@pytest.fixture(scope="session")
def make_spec(gs1, mode1):
    cache = {}

    def _make(alpha):
        if alpha not in cache:
            nu0, phi = mode1
            cache[alpha] = assemble_eigenmodes(nu0, phi, gs1, alpha)
        return cache[alpha]

    return _make


@pytest.fixture(scope="session")
def make_basis(gs1, make_spec):
    cache = {}

    def _make(alpha, dx=0.05, L=60.0):
        key = (alpha, dx, L)
        if key not in cache:
            cache[key] = SolitonBasis(gs1, make_spec(alpha), Grid1D.make(L, dx))
        return cache[key]

    return _make
