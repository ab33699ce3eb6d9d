"""Lower bounds for finite-rank Hardy-Lieb-Thirring constants.

Radial potentials are optimized by self-consistent iteration on a
logarithmic grid; a shooting solver for the rank-one problem provides an
independent reference value.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ProblemParams,
    derive_exponents,
    hardy_constant,
    multiplicity,
    normalize_potential,
    objective,
    potential_lt_norm,
    scale_potential,
)
from .grid import LogGrid, RadialPotential, build_grid, gaussian_bump, square_well  # noqa: E402
from .groundstate import c1_from_ground_state, shoot_ground_state  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .scf import SCFConfig, SCFReport, evaluate_candidate, hlt_quotient, scf_optimize  # noqa: E402
from .spectral import SpectrumCaps, discretize_channel, lowest_eigenpairs, negative_spectrum  # noqa: E402

__all__ = [
    "BACKEND", "LogGrid", "ProblemParams", "RadialPotential", "SCFConfig", "SCFReport",
    "SpectrumCaps", "build_grid", "c1_from_ground_state", "derive_exponents",
    "discretize_channel", "evaluate_candidate", "gaussian_bump", "hardy_constant",
    "hlt_quotient", "lowest_eigenpairs", "multiplicity", "negative_spectrum",
    "normalize_potential", "objective", "potential_lt_norm", "scale_potential",
    "scf_optimize", "shoot_ground_state", "square_well",
]
