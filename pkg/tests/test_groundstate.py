import math

import numpy as np
import pytest

import hardy_lt.groundstate as gsmod
from hardy_lt.core import ProblemParams, derive_exponents, potential_lt_norm
from hardy_lt.groundstate import (
    BracketError,
    ShootingAmbiguityError,
    c1_from_c_hgn,
    c1_from_ground_state,
    c_hgn_from_c1,
    decay_fit,
    hgn_prefactor,
    shoot_ground_state,
    shooting_parameter,
    verify_ground_state,
    verify_ground_state_values,
)
from hardy_lt.grid import build_grid

P3 = ProblemParams(3)


@pytest.fixture(scope="module")
def report3(ground3):
    return c1_from_ground_state(ground3)


def test_profile(ground3):
    gs = ground3
    h = gs.grid.h
    assert gs.ode_residual <= 1e-8
    assert np.all(gs.w_values[:-1] > 0)
    assert abs(gs.w_values[0] - gs.w_values[10]) <= 1e-6 * gs.a
    assert gs.a == pytest.approx(2.14735, rel=1e-5)
    assert h == pytest.approx(22 / 8000)


def test_lambda1_is_minus_one(report3):
    assert abs(report3.lambda1_check + 1.0) <= 1e-6


def test_c1_and_hgn(report3, ground3):
    assert report3.C1 == pytest.approx(1.0 / ground3.int_Qm, rel=1e-15)
    # frozen from the default oracle run
    assert report3.C1 == pytest.approx(0.0363031899178, rel=1e-9)
    assert report3.C_HGN == pytest.approx(1.38634, rel=1e-5)
    assert c1_from_c_hgn(report3.C_HGN, P3) == pytest.approx(report3.C1, rel=1e-12)
    assert c_hgn_from_c1(c1_from_c_hgn(2.5, P3), P3) == pytest.approx(2.5, rel=1e-12)


def test_prefactor():
    assert hgn_prefactor(P3) == pytest.approx(0.4 * 0.6 ** 1.5, rel=1e-15)
    assert hgn_prefactor(P3) == pytest.approx(0.185903, abs=1e-6)


def test_exponent_identity():
    e = derive_exponents(P3)
    assert (e.m - 2) * 2.5 == pytest.approx(10 / 3, rel=1e-15) == e.m


def test_norm_identity(ground3):
    # int V^(s+d/2) = int Q^m; the grid sum misses only the analytic left tail
    assert potential_lt_norm(ground3.V, P3) == pytest.approx(ground3.int_Qm, rel=1e-6)


def test_tail_decay(ground3, report3):
    slope = decay_fit(ground3)
    assert slope == pytest.approx(-1.0, rel=0.05)
    assert report3.decay_rate_fit == slope


def test_verify_detects_perturbation(ground3):
    base = verify_ground_state(ground3)
    assert base["residual"] <= 1e-8 and base["positive"] and base["monotone_tail"]
    t = ground3.grid.t
    w = ground3.w_values * (1 + 0.01 * np.exp(-((t - 0.5) / 0.3) ** 2))
    bumped = verify_ground_state_values(w, ground3.grid, P3)
    assert bumped["residual"] > 1e4 * base["residual"]


def test_verify_zero_profile():
    g = build_grid(-5, 3, 200)
    res = verify_ground_state_values(np.zeros(g.n), g, P3)
    assert res["residual"] == 0.0 and not res["positive"]


def test_bisection_reproducible():
    t0, t1 = -16.0, 6.0
    a1 = shooting_parameter(P3, t0, t1)
    a2 = shooting_parameter(P3, t0, t1, bracket=(1.5, 3.0))
    assert 0.5 * (a1[0] + a1[1]) == pytest.approx(0.5 * (a2[0] + a2[1]), rel=1e-10)


def test_bad_bracket():
    with pytest.raises(ShootingAmbiguityError):
        shooting_parameter(P3, -16.0, 6.0, bracket=(3.0, 4.0))


def test_bracket_failure(monkeypatch):
    monkeypatch.setattr(gsmod, "_shoot", lambda a, *args, **kw: (1, None))
    with pytest.raises(BracketError):
        shoot_ground_state(P3, build_grid(-10, 5, 500))


@pytest.mark.parametrize("params", [ProblemParams(3, c=0.1), ProblemParams(4, s=0.5),
                                    ProblemParams(5, s=2.0)])
def test_other_parameters(params):
    gs = shoot_ground_state(params)
    rep = c1_from_ground_state(gs)
    assert gs.ode_residual <= 1e-8
    assert abs(rep.lambda1_check + 1.0) <= 1e-6
    assert rep.C1 > 0
