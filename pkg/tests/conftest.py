import math

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import j0, j1, k0e, k1e

from hardy_lt import ProblemParams, SCFConfig, scf_optimize, shoot_ground_state
from hardy_lt import build_grid, discretize_channel, lowest_eigenpairs, square_well

# root of the Bessel matching condition for V0 = 10 on r < 1, frozen from bessel_root(10)
BESSEL_LAMBDA1 = -6.766865519043489


def bessel_match(lam, V0):
    """Interior sqrt(r) J0(k r) against exterior sqrt(r) K0(kappa r): log-derivative mismatch at r = 1."""
    k = math.sqrt(V0 + lam)
    kap = math.sqrt(-lam)
    return k * j1(k) / j0(k) - kap * k1e(kap) / k0e(kap)


def bessel_root(V0=10.0):
    # below the first zero of J0(k) the mismatch is continuous in lambda
    upper = min(-1e-9, 2.404825557695773 ** 2 - V0 - 1e-6)
    return brentq(bessel_match, -V0 + 1e-9, upper, args=(V0,), xtol=1e-15, rtol=1e-15)


def well_level(n, edge_node, V0=10.0, t_range=(-14.0, 5.0)):
    """Lowest level of the unit-radius well, obtained by placing the edge on a node.

    The well of depth ``V0 / r_e**2`` and radius ``r_e`` has exactly
    ``1 / r_e**2`` times the spectrum of the unit well; ``edge_node`` indexes
    the n=4001 grid so coarser grids sharing its nodes see the same edge.
    """
    g = build_grid(t_range[0], t_range[1], n)
    h_fine = (t_range[1] - t_range[0]) / 4000
    r_e = math.exp(t_range[0] + edge_node * h_fine)
    V = square_well(g, V0 / r_e ** 2, r_e)
    spec = lowest_eigenpairs(discretize_channel(V, 0, ProblemParams(3)), 1)
    return float(spec.eigenvalues[0]) * r_e ** 2


def richardson_well_level(edge_node=2948, V0=10.0):
    fine = well_level(4001, edge_node, V0)
    coarse = well_level(2001, edge_node, V0)
    return (4.0 * fine - coarse) / 3.0, fine, coarse


@pytest.fixture(scope="session")
def params3():
    return ProblemParams(3)


@pytest.fixture(scope="session")
def report_n1(params3):
    return scf_optimize(params3, SCFConfig())


@pytest.fixture(scope="session")
def report_wide(params3):
    """N=1 optimizer on a grid wide enough that the support is interior to 1e-12."""
    return scf_optimize(params3, SCFConfig(grid=(-24.0, 8.0, 3201)))


@pytest.fixture(scope="session")
def ground3(params3):
    return shoot_ground_state(params3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
