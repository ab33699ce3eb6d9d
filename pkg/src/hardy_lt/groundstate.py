"""Shooting oracle for the rank-one problem.

The radial positive solution ``Q`` of ``(-Delta - c/|x|^2) Q - Q^(m-1) + Q = 0``
is written as ``Q(r) = r^{-(d-2)/2} w(ln r)``, which turns the equation into

    -w'' + (e^{2t} + nu^2) w = e^{sigma t} w^(m-1),   sigma = 4s/(d-2+2s),

with ``nu^2 = c_* - c``. ``w`` is flat at ``t -> -inf`` (``w -> a``) and decays
like a modified Bessel function for large ``t``. The shooting parameter ``a``
is bisected between overshoot (``w`` crosses zero) and undershoot (``w`` turns
back up); the trajectory is then polished by Newton's method on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded
from scipy.special import kve

from .core import ProblemParams, channel_strength, derive_exponents, sphere_area
from .grid import LogGrid, RadialPotential, build_grid
from .spectral import discretize_channel, kinetic_parts, lowest_eigenpairs

DEFAULT_GRID = (-16.0, 6.0, 8001)


class BracketError(RuntimeError):
    pass


class ShootingAmbiguityError(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundState:
    params: ProblemParams
    grid: LogGrid
    w_values: np.ndarray
    a: float
    ode_residual: float
    int_Qm: float
    int_Q2: float
    newton_steps: int = 0

    @property
    def Q(self) -> np.ndarray:
        return np.exp(-(self.params.d - 2) / 2.0 * self.grid.t) * self.w_values

    @property
    def V(self) -> RadialPotential:
        """Unnormalized optimizer ``Q^(m-2)``."""
        m = derive_exponents(self.params).m
        return RadialPotential(self.grid, np.maximum(self.Q, 0.0) ** (m - 2.0))


@dataclass(frozen=True)
class GroundReport:
    C1: float
    C_HGN: float
    lambda1_check: float
    decay_rate_fit: float
    K: float


def _sigma(params):
    d, s = params.d, params.s
    return 4.0 * s / (d - 2 + 2 * s)


def _nu2(params):
    return channel_strength(params, 0)


def _shoot(a, params, t0, t1, rtol=1e-12):
    """Integrate from ``t0`` with the flat asymptotic data; classify the outcome.

    Returns ``(kind, sol)`` with kind ``+1`` for overshoot (zero crossing),
    ``-1`` for undershoot (``w'`` turns positive, or is positive at ``t1``),
    ``0`` if the profile is still positive and decreasing at ``t1``.
    """
    m = derive_exponents(params).m
    sig = _sigma(params)
    nu2 = _nu2(params)

    def rhs(t, y):
        w, dw = y
        wp = max(w, 0.0)
        return [dw, (math.exp(2.0 * t) + nu2) * w - math.exp(sig * t) * wp ** (m - 1.0)]

    def hit_zero(t, y):
        return y[0]

    hit_zero.terminal = True
    hit_zero.direction = -1

    def turn_up(t, y):
        return y[1]

    turn_up.terminal = True
    turn_up.direction = 1

    w0, dw0 = _left_data(a, t0, params)
    sol = solve_ivp(rhs, (t0, t1), [w0, dw0], method="DOP853", rtol=rtol, atol=1e-300,
                    events=(hit_zero, turn_up), dense_output=True)
    if sol.t_events[0].size:
        return 1, sol
    if sol.t_events[1].size or sol.y[1, -1] > 0.0:
        # a rise that starts before any descent never triggers the event
        return -1, sol
    return 0, sol


def _left_data(a, t0, params):
    """Two-term asymptotics of the flat solution at ``t0``."""
    m = derive_exponents(params).m
    sig = _sigma(params)
    nu2 = _nu2(params)
    if nu2 > 0:
        # w ~ a e^{nu t}: the flat branch becomes the regular power solution
        nu = math.sqrt(nu2)
        return a * math.exp(nu * t0), a * nu * math.exp(nu * t0)
    corr = -(a ** (m - 1.0)) * math.exp(sig * t0) / sig ** 2 + a * math.exp(2 * t0) / 4.0
    dcorr = -(a ** (m - 1.0)) * math.exp(sig * t0) / sig + a * math.exp(2 * t0) / 2.0
    return a + corr, dcorr


def _bracket(params, t0, t1):
    lo_a, hi_a = None, None
    a = 1.0
    kind, _ = _shoot(a, params, t0, t1)
    if kind == 0:
        return a, a
    step = 4.0
    if kind > 0:
        hi_a = a
        while a > 1e-6:
            a /= step
            k, _ = _shoot(a, params, t0, t1)
            if k < 0:
                return a, hi_a
            if k == 0:
                return a, a
            hi_a = a
    else:
        lo_a = a
        while a < 1e6:
            a *= step
            k, _ = _shoot(a, params, t0, t1)
            if k > 0:
                return lo_a, a
            if k == 0:
                return a, a
            lo_a = a
    raise BracketError("no shooting bracket found for a in [1e-6, 1e6]")


def shooting_parameter(params: ProblemParams, t0: float, t1: float, bracket=None):
    """Bisect the shooting parameter to double precision.

    Returns ``(a_lo, a_hi, sol_lo, sol_hi)`` with ``a_lo`` undershooting and
    ``a_hi`` overshooting.
    """
    lo, hi = bracket if bracket is not None else _bracket(params, t0, t1)
    k_lo, s_lo = _shoot(lo, params, t0, t1)
    k_hi, s_hi = _shoot(hi, params, t0, t1)
    if k_lo > 0 or k_hi < 0:
        raise ShootingAmbiguityError(
            f"bracket [{lo}, {hi}] does not separate undershoot and overshoot "
            f"(kinds {k_lo}, {k_hi})"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        k, s = _shoot(mid, params, t0, t1)
        if k > 0:
            hi, s_hi = mid, s
        elif k < 0:
            lo, s_lo = mid, s
        else:
            lo = hi = mid
            s_lo = s_hi = s
            break
    return lo, hi, s_lo, s_hi


def _trajectory_on_grid(grid, s_lo, s_hi, params):
    """Shooting profile on the grid, continued by the Bessel tail past divergence."""
    t = grid.t
    t_end = min(s_lo.t[-1], s_hi.t[-1])
    inside = t <= t_end
    w_lo = s_lo.sol(t[inside])[0]
    w_hi = s_hi.sol(t[inside])[0]
    w = 0.5 * (w_lo + w_hi)
    spread = np.abs(w_lo - w_hi) > 1e-6 * np.abs(w)
    # first node where the two shots have visibly separated
    cut = int(np.argmax(spread)) if spread.any() else int(inside.sum())
    cut = max(cut - 1, 1)
    nu = math.sqrt(max(_nu2(params), 0.0))
    out = np.empty(grid.n)
    out[:cut] = w[:cut]
    r = np.exp(t[cut - 1:])
    # kve(nu, r) = K_nu(r) e^r
    tail = kve(nu, r) * np.exp(-(r - r[0]))
    out[cut - 1:] = w[cut - 1] * tail / tail[0]
    out[-1] = 0.0
    return out


def _residual_vector(w, grid, params):
    """Nodal residual divided by the node weight (central differences inside)."""
    m = derive_exponents(params).m
    sig = _sigma(params)
    diag, off = kinetic_parts(grid, _nu2(params))
    q = grid.weights[:-1]
    x = w[:-1]
    Ax = diag * x
    Ax[:-1] += off * x[1:]
    Ax[1:] += off * x[:-1]
    t = grid.t[:-1]
    F = Ax + q * np.exp(2 * t) * x - q * np.exp(sig * t) * np.maximum(x, 0.0) ** (m - 1.0)
    return F / q


def _newton(w, grid, params, tol=1e-13, max_steps=30):
    m = derive_exponents(params).m
    sig = _sigma(params)
    diag, off = kinetic_parts(grid, _nu2(params))
    q = grid.weights[:-1]
    t = grid.t[:-1]
    w = w.copy()
    for step in range(max_steps):
        F = _residual_vector(w, grid, params)
        if np.max(np.abs(F)) <= tol:
            return w, step
        x = np.maximum(w[:-1], 0.0)
        jd = diag + q * np.exp(2 * t) - (m - 1.0) * q * np.exp(sig * t) * x ** (m - 2.0)
        ab = np.zeros((3, x.size))
        ab[0, 1:] = off
        ab[1] = jd
        ab[2, :-1] = off
        dx = solve_banded((1, 1), ab, F * q)
        w[:-1] -= dx
        if np.max(np.abs(dx)) <= 1e-15 * np.max(np.abs(w)):
            return w, step + 1
    return w, max_steps


def shoot_ground_state(params: ProblemParams, grid: LogGrid | None = None, tol: float = 1e-8) -> GroundState:
    """Positive radial ground state on ``grid`` (default ``t in [-16, 6]``, 8001 nodes)."""
    grid = grid or build_grid(*DEFAULT_GRID)
    a_lo, a_hi, s_lo, s_hi = shooting_parameter(params, grid.t_min, grid.t_max)
    w = _trajectory_on_grid(grid, s_lo, s_hi, params)
    w, steps = _newton(w, grid, params)
    a = 0.5 * (a_lo + a_hi)
    res = verify_ground_state_values(w, grid, params)
    if res["residual"] > tol:
        raise ShootingAmbiguityError(f"grid polish left residual {res['residual']:.3e} > {tol}")
    if not res["positive"]:
        raise ShootingAmbiguityError("polished profile is not positive")
    int_Qm, int_Q2 = _integrals(w, grid, params)
    return GroundState(params, grid, w, a, res["residual"], int_Qm, int_Q2, steps)


def _integrals(w, grid, params):
    """``int Q^m dx`` and ``int Q^2 dx`` with the flat left tail added analytically."""
    d = params.d
    m = derive_exponents(params).m
    sig = _sigma(params)
    omega = sphere_area(d)
    wt = grid.weights
    t = grid.t
    wp = np.maximum(w, 0.0)
    # Q^m e^{dt} = e^{sigma t} w^m, Q^2 e^{dt} = e^{2t} w^2
    qm = float(np.dot(wt, np.exp(sig * t) * wp ** m))
    q2 = float(np.dot(wt, np.exp(2 * t) * wp ** 2))
    nu = math.sqrt(max(_nu2(params), 0.0))
    a0 = w[0] * math.exp(-nu * t[0])
    qm += a0 ** m * math.exp((sig + m * nu) * t[0]) / (sig + m * nu)
    q2 += a0 ** 2 * math.exp((2 + 2 * nu) * t[0]) / (2 + 2 * nu)
    return omega * qm, omega * q2


def verify_ground_state_values(w, grid, params) -> dict:
    F = _residual_vector(w, grid, params)
    interior = np.abs(F[1:])
    peak = int(np.argmax(w))
    tail = w[peak:]
    return {
        "residual": float(interior.max()) if interior.size else 0.0,
        "positive": bool(np.all(w[:-1] > 0.0)),
        "monotone_tail": bool(np.all(np.diff(tail) <= 0.0)),
    }


def verify_ground_state(gs: GroundState, params: ProblemParams | None = None) -> dict:
    """Max interior defect of the transformed equation, positivity and tail checks."""
    return verify_ground_state_values(gs.w_values, gs.grid, params or gs.params)


def hgn_prefactor(params: ProblemParams) -> float:
    """``(2s/(2s+d))^s (d/(2s+d))^(d/2)``."""
    d, s = params.d, params.s
    return (2 * s / (2 * s + d)) ** s * (d / (2 * s + d)) ** (d / 2.0)


def c_hgn_from_c1(C1: float, params: ProblemParams) -> float:
    m = derive_exponents(params).m
    return (C1 / hgn_prefactor(params)) ** (-(m - 2.0) / (2.0 * m))


def c1_from_c_hgn(C_HGN: float, params: ProblemParams) -> float:
    m = derive_exponents(params).m
    return C_HGN ** (-2.0 * m / (m - 2.0)) * hgn_prefactor(params)


def decay_fit(gs: GroundState, window=(3.0, 6.0)) -> float:
    """Least-squares slope of ``log(r^{(d-1)/2} Q)`` against ``r`` on ``window``."""
    r = gs.grid.r
    sel = (r >= window[0]) & (r <= window[1])
    if sel.sum() < 20:
        raise ValueError("decay window holds fewer than 20 nodes")
    y = np.log(r[sel] ** ((gs.params.d - 1) / 2.0) * gs.Q[sel])
    return float(np.polyfit(r[sel], y, 1)[0])


def c1_from_ground_state(gs: GroundState, params: ProblemParams | None = None) -> GroundReport:
    """``C1 = 1 / int Q^m`` and the Hardy-Gagliardo-Nirenberg constant.

    ``lambda1_check`` is the lowest eigenvalue of the channel pencil with
    ``V = Q^(m-2)``; the Q-equation forces it to be ``-1``.
    """
    params = params or gs.params
    C1 = 1.0 / gs.int_Qm
    op = discretize_channel(gs.V, 0, params.replace(N=1))
    lam = lowest_eigenpairs(op, 1).eigenvalues
    lam1 = float(lam[0]) if lam.size else 0.0
    return GroundReport(
        C1=C1,
        C_HGN=c_hgn_from_c1(C1, params),
        lambda1_check=lam1,
        decay_rate_fit=decay_fit(gs),
        K=hgn_prefactor(params),
    )
