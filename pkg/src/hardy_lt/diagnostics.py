"""Property checks on computed optimizers.

Checks return small result objects so a batch of them can be reported
side by side; only invalid inputs (a bad fit window, say) raise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ProblemParams, derive_exponents, multiplicity, sphere_area
from .groundstate import GroundState
from .grid import RadialPotential
from .scf import SCFConfig, SCFReport, el_map, scf_optimize
from .spectral import SpectrumCaps, channel_spectrum

UNDERFLOW_FLOOR = 1e-280
SUPPORT_FLOOR = 1e-250
DUALITY_TOL = 0.02
DECAY_SLACK = 0.9


@dataclass(frozen=True)
class GapCheck:
    passed: bool
    simple: bool
    applicable: bool
    margin: float | None
    flagged: bool = False
    message: str = ""


@dataclass(frozen=True)
class DecayFit:
    window: tuple
    fitted_rate: float
    theory_rate: float
    margin: float
    nodes: int

    @property
    def passed(self) -> bool:
        return self.fitted_rate >= DECAY_SLACK * self.theory_rate


@dataclass(frozen=True)
class DualityReport:
    status: str
    p: float
    rhs_constant: float
    rhs_constant_alt: float
    D_implied: float | None = None
    C_hat: float | None = None
    rank1_ratio: float | None = None
    message: str = ""

    @property
    def relative(self) -> float | None:
        if self.rank1_ratio is None or self.D_implied is None:
            return None
        return self.rank1_ratio / self.D_implied

    @property
    def passed(self) -> bool | None:
        """``None`` when the check does not apply."""
        if self.status != "ok":
            return None
        if self.relative is None:
            return True
        return self.relative >= 1.0 - DUALITY_TOL


@dataclass(frozen=True)
class FlatComparison:
    C_hat_critical: float
    C_hat_flat: float
    converged: bool
    c_values: tuple
    reports: tuple = field(default=(), repr=False, compare=False)

    @property
    def margin(self) -> float:
        return self.C_hat_critical - self.C_hat_flat

    @property
    def passed(self) -> bool | None:
        """Strict gain for matched converged runs; ``None`` when not asserted."""
        if not self.converged:
            return None
        if self.c_values[0] == self.c_values[1]:
            return abs(self.margin) <= 1e-12 * max(abs(self.C_hat_critical), 1.0)
        return self.margin > 0.0


def gap_check(report: SCFReport, eig_tol: float | None = None) -> GapCheck:
    """Shell gap ``lambda_{N+1} - lambda_N`` and simplicity of the bottom level."""
    tol = 1e-10 if eig_tol is None else eig_tol
    lv = report.levels
    d = report.params.d
    simple = False
    if lv.N_prime >= 1 and lv.tags[0] is not None:
        first = lv.tags[0]
        lam1 = lv.levels[0]
        others = [x for x in list(lv.levels[1:lv.N_prime]) + (
            [lv.next_level] if lv.next_level is not None else [])]
        simple = multiplicity(d, first.ell) == 1 and all(x > lam1 + 10 * tol for x in others)
    if report.partial_shell:
        return GapCheck(False, simple, True, report.gap, flagged=True,
                        message="partially filled shell at convergence")
    if lv.next_level is None or lv.N_prime < lv.N:
        return GapCheck(simple, simple, False, None,
                        message="no negative level beyond N; gap not applicable")
    margin = float(lv.next_level - lv.levels[lv.N - 1])
    ok = margin > 10 * tol
    return GapCheck(ok and simple, simple, True, margin,
                    message="" if ok else f"gap {margin:.3e} not above {10 * tol:.1e}")


def _source(obj):
    """Potential, deepest occupied level magnitude and params of a report or ground state.

    For an optimizer report the potential is its Euler-Lagrange image. The far
    tail of the iterate itself still remembers the initial guess (it carries
    no weight in any norm), whereas the image has the self-consistent tail.
    """
    if isinstance(obj, GroundState):
        return obj.V, 1.0, obj.params
    lv = obj.levels
    if lv.N_prime < 1:
        raise ValueError("report has no negative levels")
    V = el_map(obj.V, obj.params, SpectrumCaps(max_levels=obj.params.N + 1))
    return V, abs(float(lv.levels[lv.N_prime - 1])), obj.params


def auto_window(V: RadialPotential) -> tuple:
    """``[0.3, 0.7]`` of the way from the peak of ``V`` to its last supported node."""
    r = V.grid.r
    v = V.values
    peak = int(np.argmax(v))
    idx = np.nonzero(v > SUPPORT_FLOOR)[0]
    last = int(idx[-1])
    span = r[last] - r[peak]
    return (float(r[peak] + 0.3 * span), float(r[peak] + 0.7 * span))


def decay_check(obj, window=None) -> DecayFit:
    """Least-squares slope of ``-log V`` against ``r`` compared with the bound's rate.

    ``obj`` is an :class:`SCFReport` or a :class:`GroundState` (whose level is
    exactly ``-1``).
    """
    V, lam_abs, params = _source(obj)
    r = V.grid.r
    if window is None:
        window = auto_window(V)
    lo, hi = float(window[0]), float(window[1])
    if not (r[0] <= lo < hi <= r[-1]):
        raise ValueError(f"decay window [{lo}, {hi}] lies outside the grid [{r[0]:.3g}, {r[-1]:.3g}]")
    sel = (r >= lo) & (r <= hi)
    if sel.sum() < 20:
        raise ValueError("decay window holds fewer than 20 nodes")
    v = V.values[sel]
    if np.any(v < UNDERFLOW_FLOOR):
        raise ValueError("decay window reaches the underflow region; shrink it")
    slope = -float(np.polyfit(r[sel], np.log(v), 1)[0])
    theory = derive_exponents(params).decay_coeff * math.sqrt(lam_abs) / 2.0
    return DecayFit((lo, hi), slope, theory, slope - theory, int(sel.sum()))


def duality_rhs(params: ProblemParams) -> float:
    d, s = params.d, params.s
    return (2 * s / (2 * s + d)) ** (2 * s / d) * d / (2 * s + d)


def duality_rhs_from_p(p: float, d: int) -> float:
    """Same constant written through the dual exponent ``p``."""
    s = p / (p - 1.0) - d / 2.0
    return (2 * s / (2 * s + d)) ** (2 * s / d) * d / (2 * s + d)


def rank_one_quotient(w, grid, params: ProblemParams) -> float:
    """Kinetic energy of ``u`` over ``||u^2||_p^(2p/(d(p-1)))`` for ``u`` of unit norm.

    ``u(r) = r^{-(d-2)/2} w(ln r)`` in the ``ell = 0`` channel; the kinetic
    part is the Hardy-subtracted form written with squared differences.
    """
    d = params.d
    p = derive_exponents(params).p
    omega = sphere_area(d)
    t, q, h = grid.t, grid.weights, grid.h
    w = np.asarray(w, dtype=float)
    nu2 = (d - 2) ** 2 / 4.0 - params.c
    kin = omega * (float(np.sum(np.diff(w) ** 2)) / h + nu2 * float(np.dot(q, w * w)))
    mass = omega * float(np.dot(q, np.exp(2 * t) * w * w))
    rho = np.exp(-(d - 2) * t) * w * w / mass
    lp = omega * float(np.dot(q, np.exp(d * t) * rho ** p))
    return (kin / mass) / lp ** (2.0 / (d * (p - 1.0)))


def duality_check(obj, params: ProblemParams | None = None) -> DualityReport:
    """Compare the implied dual constant with the rank-one quotient at the ground state."""
    if isinstance(obj, GroundState):
        params = params or obj.params
        C_hat = 1.0 / obj.int_Qm
    else:
        params = params or obj.params
        C_hat = obj.C_hat
    p = derive_exponents(params).p
    rhs = duality_rhs(params)
    alt = duality_rhs_from_p(p, params.d)
    if params.N >= 2 and params.s < 1.0:
        return DualityReport(
            "skipped: validity range", p, rhs, alt,
            message=f"the identity is established for s >= 1 when N >= 2 (got s={params.s}, N={params.N})",
        )
    if not C_hat > 0:
        return DualityReport("skipped: no bound", p, rhs, alt, message="objective is not positive")
    D = rhs / C_hat ** (2.0 / params.d)
    if params.N != 1:
        return DualityReport("ok", p, rhs, alt, D, C_hat,
                             message="rank-one quotient evaluated only for N = 1")
    if isinstance(obj, GroundState):
        w, grid = obj.w_values, obj.grid
    else:
        grid = obj.V.grid
        spec = channel_spectrum(obj.V, 0, params, 1)
        if spec.eigenvalues.size == 0:
            return DualityReport("skipped: no bound", p, rhs, alt, D, C_hat,
                                 message="no ground state")
        w = spec.eigenvectors[0]
    ratio = rank_one_quotient(w, grid, params)
    return DualityReport("ok", p, rhs, alt, D, C_hat, ratio)


def flat_comparison(params: ProblemParams, config: SCFConfig | None = None,
                    c_other: float = 0.0, V0=None) -> FlatComparison:
    """Run the optimizer at ``params.c`` and at ``c_other`` with the same configuration."""
    config = config or SCFConfig()
    hi = scf_optimize(params, config, V0)
    lo = scf_optimize(params.replace(c=c_other), config, V0)
    return FlatComparison(hi.C_hat, lo.C_hat, hi.converged and lo.converged,
                          (params.c, float(c_other)), (hi, lo))


def mass_profile(V: RadialPotential, radii, params: ProblemParams):
    """Fraction of ``int V^(s+d/2)`` carried by the ball of radius ``R`` for each ``R``."""
    g = V.grid
    f = V.values ** params.q * np.exp(params.d * g.t)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * g.h * (f[1:] + f[:-1]))])
    total = cum[-1]
    if not total > 0:
        raise ValueError("potential has zero norm")
    out = []
    for R in radii:
        R = float(R)
        if not (g.r[0] <= R <= g.r[-1] * (1 + 1e-12)):
            raise ValueError(f"radius {R} outside the grid")
        frac = float(np.interp(math.log(R), g.t, cum)) / total
        out.append((R, min(max(frac, 0.0), 1.0)))
    return out
