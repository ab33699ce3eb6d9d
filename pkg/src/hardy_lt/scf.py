"""Self-consistent iteration for optimizers of the finite-rank problem.

An optimizer ``V_N`` is a fixed point of ``V -> normalize(rho_V ** el_power)``
with ``rho_V = sum_i |lambda_i|^(s-1) |u_i|^2`` over the occupied levels of
``-Delta - c/|x|^2 - V``. Every evaluated candidate is a lower bound for the
sharp constant (radial potentials only).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DegeneratePotentialError,
    MinMaxLevels,
    ProblemParams,
    assemble_min_max_levels,
    derive_exponents,
    normalize_potential,
    objective,
    potential_lt_norm,
    sphere_area,
)
from .grid import LogGrid, RadialPotential, build_grid, gaussian_bump
from .spectral import SpectrumCaps, negative_spectrum

log = logging.getLogger(__name__)

RADIAL_NOTE = "radial potentials only: values are lower bounds of the sharp constant"
DEFAULT_STARTS = [(w, c) for w in (1.0, 0.5, 2.0) for c in (0.0, -1.0, 1.0)]


class NoBoundStatesError(RuntimeError):
    pass


class SingularOccupationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Occupation:
    """Occupation numbers per shell ``(ell, index)``; a shell holds ``mu(d, ell)`` states."""

    shells: dict
    total: float
    partial_shell: tuple | None = None


@dataclass(frozen=True)
class Density:
    grid: LogGrid
    values: np.ndarray


@dataclass(frozen=True)
class SCFConfig:
    alpha0: float = 0.5
    max_iters: int = 500
    tol_obj: float = 1e-10
    tol_residual: float = 1e-6
    ascent_safeguard: bool = True
    grid: tuple = (-12.0, 6.0, 1801)
    eig_tol: float = 1e-10
    tol_level: float = 1e-12
    multistart: int = 1
    seed: int = 0
    workers: int = 1
    alpha_min: float = 1e-8

    def __post_init__(self):
        if not 0 < self.alpha0 <= 1:
            raise ValueError("alpha0 must lie in (0, 1]")
        for name in ("tol_obj", "tol_residual", "eig_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_iters < 1 or self.multistart < 1:
            raise ValueError("max_iters and multistart must be >= 1")

    def build_grid(self) -> LogGrid:
        return build_grid(*self.grid)

    def caps(self, params: ProblemParams) -> SpectrumCaps:
        return SpectrumCaps(max_levels=params.N + 1, tol=self.eig_tol,
                            tol_level=self.tol_level, workers=self.workers)


@dataclass
class SCFReport:
    params: ProblemParams
    converged: bool
    status: str
    iterations: int
    V: RadialPotential
    levels: MinMaxLevels
    objective: float
    residual: float
    gap: float | None
    trace: list = field(default_factory=list)
    contamination: float = 0.0
    partial_shell: bool = False
    flags: list = field(default_factory=list)
    starts: list = field(default_factory=list)
    note: str = RADIAL_NOTE

    @property
    def grid(self) -> LogGrid:
        return self.V.grid

    @property
    def C_hat(self) -> float:
        return self.objective


def assign_occupations(spectra, params: ProblemParams) -> Occupation:
    """Fill shells in ``(lambda, ell, index)`` order until ``N`` states are used.

    A shell that would overfill receives the remaining slots spread evenly over
    its ``mu`` states, which keeps the density radial.
    """
    shells = sorted(
        (float(lam), sp.ell, i, sp.multiplicity)
        for sp in spectra
        for i, lam in enumerate(sp.eigenvalues)
    )
    left = params.N
    occ = {}
    partial = None
    for lam, ell, i, mu in shells:
        if left <= 0:
            break
        take = min(mu, left)
        occ[(ell, i)] = float(take)
        if take < mu:
            partial = (ell, i)
        left -= take
    return Occupation(shells=occ, total=float(params.N - max(left, 0)), partial_shell=partial)


def density_from(spectra, occupation: Occupation, params: ProblemParams, grid: LogGrid,
                 tol_level: float = 1e-12) -> Density:
    """Radial density ``sum occ |lambda|^(s-1) R(r)^2 / |S^{d-1}|``.

    ``R(r) = r^{-(d-2)/2} w(ln r)`` with ``w`` the B-normalized channel vector.
    """
    by_ell = {sp.ell: sp for sp in spectra}
    omega = sphere_area(params.d)
    rho_w = np.zeros(grid.n)
    for (ell, i), occ in occupation.shells.items():
        sp = by_ell[ell]
        lam = float(sp.eigenvalues[i])
        if params.s == 1.0:
            weight = 1.0
        elif params.s < 1.0 and abs(lam) < tol_level:
            raise SingularOccupationError(
                f"singular occupation weight: |lambda|={abs(lam):.3e} with s={params.s} < 1"
            )
        else:
            weight = abs(lam) ** (params.s - 1.0)
        w = sp.eigenvectors[i]
        rho_w += (occ * weight / omega) * w * w
    return Density(grid, rho_w * np.exp(-(params.d - 2) * grid.t))


def lt_distance(V: RadialPotential, W: RadialPotential, params: ProblemParams) -> float:
    g = V.grid
    diff = np.abs(V.values - W.values) ** params.q * np.exp(params.d * g.t)
    return (sphere_area(params.d) * float(np.dot(g.weights, diff))) ** (1.0 / params.q)


def _el_from_spectra(spectra, V: RadialPotential, params: ProblemParams, tol_level: float):
    if not spectra:
        raise NoBoundStatesError("no bound states")
    occ = assign_occupations(spectra, params)
    rho = density_from(spectra, occ, params, V.grid, tol_level).values
    power = derive_exponents(params).el_power
    W = normalize_potential(V.with_values(np.maximum(rho, 0.0) ** power), params)
    return W, occ


def el_map(V: RadialPotential, params: ProblemParams, caps: SpectrumCaps | None = None) -> RadialPotential:
    """One Euler-Lagrange update ``normalize(rho_V ** (2/(2s+d-2)))``."""
    caps = caps or SpectrumCaps(max_levels=params.N + 1)
    V = normalize_potential(V, params)
    W, _ = _el_from_spectra(negative_spectrum(V, params, caps), V, params, caps.tol_level)
    return W


def el_residual(V: RadialPotential, params: ProblemParams, caps: SpectrumCaps | None = None) -> float:
    """``L^(s+d/2)`` distance between ``V`` and its Euler-Lagrange image."""
    V = normalize_potential(V, params)
    return lt_distance(V, el_map(V, params, caps), params)


def evaluate_candidate(V: RadialPotential, params: ProblemParams, caps: SpectrumCaps | None = None):
    """Objective of ``normalize(V)`` and its min-max levels."""
    caps = caps or SpectrumCaps(max_levels=params.N + 1)
    Vn = normalize_potential(V, params)
    spectra = negative_spectrum(Vn, params, caps)
    levels = assemble_min_max_levels(spectra, params)
    return objective(levels, params.s), levels


def hlt_quotient(V: RadialPotential, params: ProblemParams, caps: SpectrumCaps | None = None) -> float:
    """``sum |lambda_i|^s / int V^(s+d/2)`` for an unnormalized ``V``.

    Unlike :func:`evaluate_candidate` this is invariant under
    ``V -> tau^2 V(tau .)``: both numerator and denominator scale by
    ``tau^(2s)``. At a normalized ``V`` the two agree.
    """
    caps = caps or SpectrumCaps(max_levels=params.N + 1)
    norm = potential_lt_norm(V, params)
    if not norm > 0.0:
        raise DegeneratePotentialError("degenerate potential: L^(s+d/2) norm is zero")
    levels = assemble_min_max_levels(negative_spectrum(V, params, caps), params)
    return objective(levels, params.s) / norm


class _State:
    __slots__ = ("V", "spectra", "levels", "S")

    def __init__(self, V, params, caps):
        self.V = V
        self.spectra = negative_spectrum(V, params, caps)
        self.levels = assemble_min_max_levels(self.spectra, params)
        self.S = objective(self.levels, params.s)


def _gap(levels: MinMaxLevels):
    if levels.next_level is None or levels.N_prime < levels.N:
        return None
    return float(levels.next_level - levels.levels[-1])


def _occupied_contamination(state: _State, params) -> float:
    occ = assign_occupations(state.spectra, params)
    by_ell = {sp.ell: sp for sp in state.spectra}
    vals = [by_ell[ell].contamination[i] for (ell, i) in occ.shells]
    return float(max(vals)) if vals else 0.0


def _polish(state, W, params, config, caps, trace, it, residual):
    """Take one unmixed step at convergence.

    Mixing leaves the far tail of ``V`` dominated by the initial guess, since
    that region barely moves the norm. The Euler-Lagrange image carries the
    self-consistent tail; it is kept only if it passes the ascent test and
    the residual tolerance.
    """
    new = _State(W, params, caps)
    if config.ascent_safeguard and new.S < state.S - 1e-14:
        return state, residual
    try:
        W2, _ = _el_from_spectra(new.spectra, new.V, params, caps.tol_level)
    except NoBoundStatesError:
        return state, residual
    res = lt_distance(new.V, W2, params)
    if res > config.tol_residual:
        return state, residual
    trace.append((it + 1, new.S, res, 1.0))
    return new, res


def _run_single(params, config, V0, caps):
    V = normalize_potential(V0, params)
    state = _State(V, params, caps)
    alpha = config.alpha0
    trace = []
    converged = False
    status = "max_iters"
    residual = math.inf
    last_rel = math.inf
    it = 0
    for it in range(config.max_iters + 1):
        try:
            W, _ = _el_from_spectra(state.spectra, state.V, params, caps.tol_level)
        except NoBoundStatesError:
            status = "no bound states"
            break
        residual = lt_distance(state.V, W, params)
        trace.append((it, state.S, residual, alpha))
        if it > 0 and last_rel <= config.tol_obj and residual <= config.tol_residual:
            converged = True
            status = "converged"
            state, residual = _polish(state, W, params, config, caps, trace, it, residual)
            break
        if it == config.max_iters:
            break
        while True:
            trial = normalize_potential(
                state.V.with_values((1.0 - alpha) * state.V.values + alpha * W.values), params
            )
            new = _State(trial, params, caps)
            if not config.ascent_safeguard or new.S >= state.S - 1e-14:
                break
            alpha *= 0.5
            if alpha < config.alpha_min:
                new = None
                break
        if new is None:
            status = "stalled"
            break
        last_rel = abs(new.S - state.S) / max(new.S, 1e-300)
        state = new
        alpha = min(alpha * 1.2, config.alpha0)
    return state, trace, converged, status, residual, it


def initial_guesses(grid: LogGrid, count: int, seed: int = 0):
    """Gaussian bumps in ``t``; beyond the nine standard ones, seeded jitter."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        if k < len(DEFAULT_STARTS):
            width, center = DEFAULT_STARTS[k]
        else:
            width = float(np.exp(rng.uniform(np.log(0.5), np.log(2.0))))
            center = float(rng.uniform(-1.0, 1.0))
        out.append(((width, center), gaussian_bump(grid, center, width)))
    return out


def scf_optimize(params: ProblemParams, config: SCFConfig | None = None,
                 V0: RadialPotential | None = None) -> SCFReport:
    """Run the mixed fixed-point iteration and report the best run.

    ``V_{k+1} = normalize((1 - a) V_k + a el_map(V_k))``; a step that lowers
    the objective halves ``a``, accepted steps grow it by 1.2 up to ``alpha0``.
    Converged means the relative objective change of the last accepted step
    is at most ``tol_obj`` and the Euler-Lagrange residual at most
    ``tol_residual``.
    """
    config = config or SCFConfig()
    caps = config.caps(params)
    if V0 is not None:
        starts = [("given", V0)]
    else:
        starts = initial_guesses(config.build_grid(), config.multistart, config.seed)
    best = None
    summaries = []
    for label, start in starts:
        try:
            result = _run_single(params, config, start, caps)
        except DegeneratePotentialError as exc:
            summaries.append({"start": label, "status": str(exc), "objective": None})
            continue
        state, trace, converged, status, residual, it = result
        summaries.append({"start": label, "status": status, "objective": state.S,
                          "converged": converged})
        log.info("start %s: %s after %d iterations, objective %.12g", label, status, it, state.S)
        key = (state.S > 0, converged, state.S)
        if best is None or key > best[0]:
            best = (key, result)
    if best is None:
        raise NoBoundStatesError("no usable initial potential")
    state, trace, converged, status, residual, it = best[1]
    occ = assign_occupations(state.spectra, params) if state.spectra else Occupation({}, 0.0)
    partial = occ.partial_shell is not None
    flags = []
    if converged and partial:
        flags.append("gap violation suspected")
    contamination = _occupied_contamination(state, params) if state.spectra else 0.0
    if contamination > 1e-8:
        flags.append("boundary contamination")
    if state.S <= 0:
        converged = False
    return SCFReport(
        params=params,
        converged=converged,
        status=status,
        iterations=it,
        V=state.V,
        levels=state.levels,
        objective=state.S,
        residual=residual,
        gap=_gap(state.levels),
        trace=trace,
        contamination=contamination,
        partial_shell=partial,
        flags=flags,
        starts=summaries,
    )
