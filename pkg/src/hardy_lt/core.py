"""Problem parameters, exponents, angular channels and the normalization
algebra of the finite-rank Hardy-Lieb-Thirring maximization problem.

The problem is to maximize ``sum_{i<=N} |lambda_i(-Delta - c/|x|^2 - V)|^s``
over radial ``V >= 0`` with ``int V^(s+d/2) dx = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import RadialPotential

SUPPORT_THRESHOLD = 1e-300
BOUNDARY_TOL = 1e-12


class DegeneratePotentialError(ValueError):
    pass


class SupportEscapesGridError(ValueError):
    pass


def hardy_constant(d: int) -> float:
    """Sharp Hardy constant ``(d-2)^2/4``."""
    if int(d) != d or d < 3:
        raise ValueError(f"d must be ≥ 3, got {d}")
    return (d - 2) ** 2 / 4.0


@dataclass(frozen=True)
class ProblemParams:
    """Dimension ``d``, Hardy coupling ``c``, exponent ``s`` and rank ``N``.

    ``c`` defaults to the critical value ``(d-2)^2/4``; the string
    ``"critical"`` is accepted as well.
    """

    d: int
    s: float = 1.0
    N: int = 1
    c: float | str | None = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 3:
            raise ValueError(f"d must be ≥ 3, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if not (math.isfinite(self.s) and self.s > 0):
            raise ValueError(f"s must be > 0, got {self.s}")
        object.__setattr__(self, "s", float(self.s))
        cstar = hardy_constant(self.d)
        c = self.c
        if c is None or (isinstance(c, str) and c.strip().lower() == "critical"):
            c = cstar
        c = float(c)
        if not (0.0 <= c <= cstar * (1 + 1e-15)):
            raise ValueError(f"c must lie in [0, {cstar}], got {c}")
        object.__setattr__(self, "c", min(c, cstar))

    @property
    def c_star(self) -> float:
        return hardy_constant(self.d)

    @property
    def is_critical(self) -> bool:
        return self.c == self.c_star

    @property
    def q(self) -> float:
        """Norm exponent ``s + d/2`` of the potential constraint."""
        return self.s + self.d / 2.0

    def replace(self, **changes) -> "ProblemParams":
        kw = dict(d=self.d, s=self.s, N=self.N, c=self.c)
        kw.update(changes)
        return ProblemParams(**kw)


@dataclass(frozen=True)
class ExponentSet:
    m: float
    p: float
    el_power: float
    lt_norm_exponent: float
    decay_coeff: float


def derive_exponents(params: ProblemParams) -> ExponentSet:
    d, s = params.d, params.s
    return ExponentSet(
        m=(2 * d + 4 * s) / (d - 2 + 2 * s),
        p=(2 * s + d) / (2 * s + d - 2),
        el_power=2.0 / (2 * s + d - 2),
        lt_norm_exponent=s + d / 2.0,
        decay_coeff=4.0 / (2 * s + d - 2),
    )


def channel_strength(params: ProblemParams, ell: int) -> float:
    """Barrier coefficient ``(ell + (d-2)/2)^2 - c`` of channel ``ell``."""
    if ell < 0:
        raise ValueError("ell must be >= 0")
    return (ell + (params.d - 2) / 2.0) ** 2 - params.c


def multiplicity(d: int, ell: int) -> int:
    """Dimension of the degree-``ell`` spherical harmonics on ``S^{d-1}``."""
    if ell < 0:
        raise ValueError("ell must be >= 0")
    return (2 * ell + d - 2) * math.factorial(ell + d - 3) // (
        math.factorial(ell) * math.factorial(d - 2)
    )


def sphere_area(d: int) -> float:
    """Surface area ``2 pi^(d/2) / Gamma(d/2)`` of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class LevelTag:
    ell: int
    index: int
    slot: int


@dataclass(frozen=True)
class MinMaxLevels:
    """First ``N`` min-max levels, zero padded past the negative spectrum.

    ``tags[i]`` is ``None`` for padded zeros; ``M`` is the number of strictly
    negative levels found before truncation and ``N_prime = min(M, N)``.
    """

    levels: np.ndarray
    tags: tuple
    M: int
    N_prime: int
    next_level: float | None = None
    next_tag: LevelTag | None = None

    @property
    def N(self) -> int:
        return len(self.levels)


def assemble_min_max_levels(channel_spectra, params: ProblemParams) -> MinMaxLevels:
    """Merge channel eigenvalues, each repeated by its multiplicity.

    Ties are broken by ``(lambda, ell, index)``. Besides the first ``N``
    levels the first level past ``N`` (if negative and available) is kept
    for gap diagnostics.
    """
    merged = []
    for spec in channel_spectra:
        mu = multiplicity(params.d, spec.ell)
        for idx, lam in enumerate(spec.eigenvalues):
            for slot in range(mu):
                merged.append((float(lam), spec.ell, idx, slot))
    merged.sort()
    M = len(merged)
    N = params.N
    levels = np.zeros(N)
    tags = [None] * N
    for i, (lam, ell, idx, slot) in enumerate(merged[:N]):
        levels[i] = lam
        tags[i] = LevelTag(ell, idx, slot)
    nxt = merged[N] if M > N else None
    levels.setflags(write=False)
    return MinMaxLevels(
        levels=levels,
        tags=tuple(tags),
        M=M,
        N_prime=min(M, N),
        next_level=None if nxt is None else nxt[0],
        next_tag=None if nxt is None else LevelTag(nxt[1], nxt[2], nxt[3]),
    )


def objective(levels: MinMaxLevels | np.ndarray, s: float) -> float:
    """``sum |lambda_i|^s`` over the first ``N`` min-max levels."""
    lam = levels.levels if isinstance(levels, MinMaxLevels) else np.asarray(levels, dtype=float)
    return float(np.sum(np.abs(lam) ** s))


def potential_lt_norm(V: RadialPotential, params: ProblemParams) -> float:
    """Trapezoid value of ``int_{R^d} V^(s+d/2) dx`` in the log variable."""
    g = V.grid
    integrand = V.values ** params.q * np.exp(params.d * g.t)
    return sphere_area(params.d) * float(np.dot(g.weights, integrand))


def normalize_potential(V: RadialPotential, params: ProblemParams) -> RadialPotential:
    norm = potential_lt_norm(V, params)
    if not norm > 0.0 or not math.isfinite(norm):
        raise DegeneratePotentialError("degenerate potential: L^(s+d/2) norm is zero")
    return V.with_values(V.values * norm ** (-1.0 / params.q))


def scale_potential(V: RadialPotential, k: int, params: ProblemParams) -> RadialPotential:
    """Apply ``V -> tau^2 V(tau .)`` with ``tau = exp(k h)``.

    On the log grid this is a translation by ``k`` nodes times ``tau^2``.
    Eigenvalues of the scaled operator are exactly ``tau^2`` times the old
    ones; the ``L^(s+d/2)`` norm picks up ``tau^(2s)``, so the normalized
    objective is unchanged. Nodes shifted in from outside the grid are zero;
    losing more than ``BOUNDARY_TOL`` of the norm raises.
    """
    k = int(k)
    if k == 0:
        return V
    g = V.grid
    v = V.values
    if abs(k) >= g.n:
        raise SupportEscapesGridError("support escapes grid: shift exceeds grid length")
    dens = v ** params.q * np.exp(params.d * g.t) * g.weights
    total = float(dens.sum())
    supported = v >= SUPPORT_THRESHOLD * (v.max() if v.size else 0.0)
    # new[j] = tau^2 * v[j + k]; source nodes outside [0, n) are lost
    lost = dens[:k].sum() if k > 0 else dens[k:].sum()
    lost_support = supported[:k].any() if k > 0 else supported[k:].any()
    if total > 0 and lost_support and lost > BOUNDARY_TOL * total:
        raise SupportEscapesGridError(
            f"support escapes grid: shift by {k} nodes drops {lost / total:.3e} of the norm"
        )
    out = np.zeros_like(v)
    if k > 0:
        out[:-k] = v[k:]
    else:
        out[-k:] = v[:k]
    return V.with_values(out * math.exp(2.0 * k * g.h))
