"""Negative spectrum of ``-Delta - c/|x|^2 - V`` for radial ``V``.

Each angular channel ``ell`` is reduced with ``u = r^{-(d-2)/2} w(ln r)`` to

    -w'' + nu_ell^2 w - e^{2t} V(e^t) w = lambda e^{2t} w,

discretized on the uniform ``t`` grid as a symmetric tridiagonal pencil
``(A, B)``. The left end carries the natural (flat) boundary condition, the
right end is Dirichlet. Eigenvalues are located by Sturm-sequence bisection
and eigenvectors by inverse iteration.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import kernels
from .core import ProblemParams, channel_strength, multiplicity
from .grid import RadialPotential

EDGE_FRACTION = 0.05
CONTAMINATION_TOL = 1e-8


class SpectralError(RuntimeError):
    pass


class InverseIterationError(SpectralError):
    def __init__(self, index, msg):
        super().__init__(f"inverse iteration did not converge for eigenvalue index {index}: {msg}")
        self.index = index


class BoundaryContaminationError(SpectralError):
    pass


class ChannelCapError(SpectralError):
    pass


@dataclass(frozen=True)
class SpectrumCaps:
    """Limits and tolerances for :func:`negative_spectrum`.

    ``max_levels`` caps the eigenvalues requested per channel, ``tol_level``
    is the width of the band below zero that is classified as zero.
    """

    max_levels: int = 8
    max_channels: int = 64
    tol: float = 1e-10
    tol_level: float = 1e-12
    check_boundary: bool = False
    workers: int = 1


@dataclass(frozen=True)
class ChannelOperator:
    """Pencil ``(A, B)`` of one channel on the free nodes ``0 .. n-2``."""

    ell: int
    nu2: float
    diag: np.ndarray
    offdiag: np.ndarray
    weight: np.ndarray
    grid: object
    d: int = 3

    def dense(self):
        A = np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return A, np.diag(self.weight)

    def symmetrized(self):
        """Dense ``B^{-1/2} A B^{-1/2}``."""
        s = 1.0 / np.sqrt(self.weight)
        A, _ = self.dense()
        return A * s[:, None] * s[None, :]


@dataclass(frozen=True)
class ChannelSpectrum:
    ell: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # shape (k, n); last node is the Dirichlet zero
    multiplicity: int
    contamination: np.ndarray


def kinetic_parts(grid, nu2: float):
    """Diagonal and off-diagonal of the potential-free stiffness matrix."""
    n, h = grid.n, grid.h
    q = grid.weights[:-1]
    diag = np.full(n - 1, 2.0 / h)
    diag[0] = 1.0 / h
    diag = diag + q * nu2
    off = np.full(n - 2, -1.0 / h)
    return diag, off


def discretize_channel(V: RadialPotential, ell: int, params: ProblemParams) -> ChannelOperator:
    g = V.grid
    if g.n < 16:
        raise ValueError("eigenvalue problems need a grid with at least 16 nodes")
    nu2 = channel_strength(params, ell)
    diag, off = kinetic_parts(g, nu2)
    q = g.weights[:-1]
    e2t = np.exp(2.0 * g.t[:-1])
    diag = diag - q * e2t * V.values[:-1]
    return ChannelOperator(ell=ell, nu2=nu2, diag=diag, offdiag=off, weight=q * e2t, grid=g,
                           d=params.d)


def _banded(op: ChannelOperator, sigma: float):
    ab = np.zeros((3, op.diag.size))
    ab[0, 1:] = op.offdiag
    ab[1] = op.diag - sigma * op.weight
    ab[2, :-1] = op.offdiag
    return ab


def _apply(op: ChannelOperator, x):
    y = op.diag * x
    y[:-1] += op.offdiag * x[1:]
    y[1:] += op.offdiag * x[:-1]
    return y


def _inverse_iteration(op, lam, prev, index, restarts=5):
    """B-normalized eigenvector for an accurately known eigenvalue ``lam``.

    Converged when successive iterates agree to 1e-12 in the B-norm.
    """
    n = op.diag.size
    rng = np.random.default_rng(1234 + index)
    b = op.weight
    scale = max(abs(lam), 1e-300)
    change = float("nan")
    for attempt in range(restarts + 1):
        shift = lam - scale * 1e-13 * (1 + 10 * attempt)
        ab = _banded(op, shift)
        x = rng.standard_normal(n) if attempt else np.ones(n)
        x /= math.sqrt(np.dot(x * b, x))
        for _ in range(12):
            with np.errstate(all="ignore"):
                y = solve_banded((1, 1), ab, b * x, check_finite=False)
            if not np.all(np.isfinite(y)):
                break
            for p in prev:
                y -= np.dot(p * b, y) * p
            nrm = math.sqrt(abs(np.dot(y * b, y)))
            if nrm == 0.0:
                break
            y /= nrm
            if np.dot(y * b, x) < 0:
                y = -y
            dy = y - x
            change = math.sqrt(np.dot(dy * b, dy))
            x = y
            if change <= 1e-12:
                if x[np.argmax(np.abs(x))] < 0:
                    x = -x
                return x
    raise InverseIterationError(index, f"iterate change {change:.3e} after {restarts} restarts")


def rayleigh_quotient(op: ChannelOperator, w) -> float:
    """``w^T A w / w^T B w`` with the stiffness written as squared differences.

    Summing ``(w_{j+1} - w_j)^2 / h`` instead of ``w^T K w`` avoids the
    cancellation between the diagonal and off-diagonal parts.
    """
    x = w[: op.diag.size]
    e = op.offdiag
    kin = -float(np.dot(e, (x[1:] - x[:-1]) ** 2))
    # the free-end diagonal carries 1/h, interior 2/h; the Dirichlet neighbour adds -e_last x_last^2
    kin += -e[-1] * x[-1] ** 2 if e.size else 0.0
    pot = float(np.dot(op.diag - _kinetic_diag(op), x * x))
    return (kin + pot) / float(np.dot(op.weight, x * x))


def _kinetic_diag(op):
    d = np.full(op.diag.size, -2.0 * op.offdiag[0])
    d[0] = -op.offdiag[0]
    return d


def _edge_mass(w, b):
    n = w.size
    k = max(1, int(math.ceil(EDGE_FRACTION * n)))
    mass = w * w * b
    total = mass.sum()
    return float((mass[:k].sum() + mass[-k:].sum()) / total) if total > 0 else 0.0


def lowest_eigenpairs(op: ChannelOperator, k: int, tol: float = 1e-10) -> ChannelSpectrum:
    """All negative pencil eigenvalues (at most ``k``) with B-orthonormal vectors.

    Bisection runs to the resolution of double precision; ``tol`` is the
    accuracy floor the caller is promised.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    a, e, b = op.diag, op.offdiag, op.weight
    count = kernels.sturm_count(a, e, b, 0.0)
    count = min(count, k)
    d = multiplicity(op.d, op.ell)
    if count == 0:
        return ChannelSpectrum(op.ell, np.empty(0), np.empty((0, op.grid.n)), d, np.empty(0))
    # Gershgorin bound on B^{-1/2} A B^{-1/2}
    sb = np.sqrt(b)
    rad = np.zeros_like(a)
    rad[:-1] += np.abs(e) / (sb[:-1] * sb[1:])
    rad[1:] += np.abs(e) / (sb[:-1] * sb[1:])
    lo = float(np.min(a / b - rad))
    lo = lo - 1e-12 * abs(lo) - 1e-300
    lam = kernels.bisect_eigenvalues(a, e, b, lo, 0.0, count, 0.0)
    vecs = []
    lam = np.array(lam)
    for i, l in enumerate(lam):
        vecs.append(_inverse_iteration(op, float(l), vecs, i))
        # the quotient is stationary at the eigenvector: noise-free to O(vector error^2)
        rq = rayleigh_quotient(op, vecs[-1])
        if abs(rq - l) <= max(tol, 1e-8 * abs(l)):
            lam[i] = rq
    W = np.zeros((count, op.grid.n))
    W[:, :-1] = np.array(vecs)
    contamination = np.array([_edge_mass(v, b) for v in vecs])
    return ChannelSpectrum(op.ell, np.asarray(lam), W, d, contamination)


def channel_spectrum(V: RadialPotential, ell: int, params: ProblemParams, k: int, tol: float = 1e-10):
    return lowest_eigenpairs(discretize_channel(V, ell, params), k, tol)


def _filtered(spec: ChannelSpectrum, tol_level: float) -> ChannelSpectrum:
    keep = spec.eigenvalues < -tol_level
    if keep.all():
        return spec
    return ChannelSpectrum(spec.ell, spec.eigenvalues[keep], spec.eigenvectors[keep],
                           spec.multiplicity, spec.contamination[keep])


def negative_spectrum(V: RadialPotential, params: ProblemParams, caps: SpectrumCaps | None = None):
    """Channel spectra ``ell = 0, 1, ...`` up to the first channel without bound states.

    The diagonal of ``A_ell`` increases with ``ell`` while the rest of the
    pencil is unchanged, so channel ground levels are nondecreasing in
    ``ell`` and the first empty channel ends the search.
    """
    caps = caps or SpectrumCaps()
    out = []
    workers = max(1, int(caps.workers))
    ell = 0
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while True:
            batch = list(range(ell, ell + workers))
            if batch[0] >= caps.max_channels:
                raise ChannelCapError(
                    f"more than max_channels={caps.max_channels} channels carry bound states"
                )
            fn = lambda l: _filtered(channel_spectrum(V, l, params, caps.max_levels, caps.tol), caps.tol_level)
            results = list(pool.map(fn, batch)) if pool else [fn(batch[0])]
            done = False
            for spec in results:
                if spec.eigenvalues.size == 0:
                    done = True
                    break
                if spec.ell >= caps.max_channels:
                    raise ChannelCapError(
                        f"more than max_channels={caps.max_channels} channels carry bound states"
                    )
                out.append(spec)
            if done:
                break
            ell += workers
    finally:
        if pool:
            pool.shutdown()
    if caps.check_boundary:
        for spec in out:
            bad = spec.contamination > CONTAMINATION_TOL
            if bad.any():
                raise BoundaryContaminationError(
                    f"boundary contamination in channel {spec.ell}: edge mass "
                    f"{spec.contamination.max():.2e}; enlarge the grid"
                )
    return out


def dense_eigenvalues(op: ChannelOperator) -> np.ndarray:
    """Dense symmetric eigensolve of ``B^{-1/2} A B^{-1/2}`` (oracle path)."""
    return np.linalg.eigvalsh(op.symmetrized())


def dense_negative_count(op: ChannelOperator) -> int:
    """Negative inertia of ``A`` by a dense solve; equals the pencil count."""
    A, _ = op.dense()
    return int(np.sum(np.linalg.eigvalsh(A) < 0.0))
