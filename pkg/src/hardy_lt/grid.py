"""Logarithmic radial grid and radial potentials sampled on it."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LogGrid:
    """Uniform grid in ``t = ln r``.

    Attributes
    ----------
    t_min, t_max : float
        End points in the log variable.
    n : int
        Number of nodes. Eigenvalue problems need at least 16; plain
        quadrature works with any ``n >= 2``.
    """

    t_min: float
    t_max: float
    n: int
    t: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.t_min) and np.isfinite(self.t_max)):
            raise ValueError("grid bounds must be finite")
        if not self.t_min < self.t_max:
            raise ValueError(f"invalid grid bounds: t_min={self.t_min} >= t_max={self.t_max}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid needs at least 2 nodes, got n={self.n}")
        object.__setattr__(self, "n", int(self.n))
        t = np.linspace(self.t_min, self.t_max, self.n)
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    @property
    def h(self) -> float:
        return (self.t_max - self.t_min) / (self.n - 1)

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.t)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights in ``t`` (half weight at both ends)."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def spec(self) -> tuple[float, float, int]:
        return (float(self.t_min), float(self.t_max), int(self.n))


def build_grid(t_min: float, t_max: float, n: int) -> LogGrid:
    """Uniform log grid; ``build_grid(-12, 6, 1801).h == 0.01``."""
    return LogGrid(float(t_min), float(t_max), n)


@dataclass(frozen=True)
class RadialPotential:
    """Nonnegative radial potential ``V(r)`` sampled at the grid radii."""

    grid: LogGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"potential has shape {v.shape}, grid has {self.grid.n} nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("potential values must be finite")
        if np.any(v < 0.0):
            raise ValueError("potential values must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: LogGrid, fn) -> "RadialPotential":
        return cls(grid, np.asarray(fn(grid.r), dtype=float))

    def with_values(self, values) -> "RadialPotential":
        return RadialPotential(self.grid, values)


def gaussian_bump(grid: LogGrid, center: float = 0.0, width: float = 1.0) -> RadialPotential:
    """Gaussian in ``t`` (not in ``r``); the default initial guess."""
    return RadialPotential(grid, np.exp(-0.5 * ((grid.t - center) / width) ** 2))


def square_well(grid: LogGrid, depth: float, radius: float = 1.0) -> RadialPotential:
    """``depth`` on ``r < radius``, sampled as dual-cell averages.

    Each node gets ``depth`` times the fraction of its cell
    ``[t_j - h/2, t_j + h/2]`` lying inside the well, which keeps the edge
    at its true position to second order when it falls between nodes.
    """
    t_edge = np.log(radius)
    h = grid.h
    frac = np.clip((t_edge - (grid.t - 0.5 * h)) / h, 0.0, 1.0)
    return RadialPotential(grid, depth * frac)
