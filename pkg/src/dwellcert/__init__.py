"""Dwell-time stability certificates for linear impulsive systems.

The package certifies asymptotic stability of systems that flow along
``xdot = A x`` and jump ``x+ = J x`` at impulse instants, for periodic,
minimal, maximal, ranged and arbitrary dwell-time regimes, for known or
polytopically uncertain matrices.  Certificates are matrix-inequality
feasibility points that are always re-verified independently of the
solver, and can be cross-checked against spectral oracles and simulated
trajectories.
"""

__version__ = "0.1.0"

from .analysis import (
    Verdict,
    alpha_stability_constants,
    arbitrary_impulses,
    maximal_dwell_alt,
    maximal_dwell_lemma,
    maximal_dwell_looped,
    minimal_dwell_lemma,
    minimal_dwell_looped,
    periodic_lmi,
    periodic_looped,
    periodic_spectral,
    ranged_lemma_grid,
    ranged_looped,
    robust_maximal,
    robust_minimal,
    robust_periodic,
    robust_ranged,
)
from .config import DEFAULT_CONFIG, NumericConfig
from .search import BoundaryResult, bisect_boundary, eig_oracle_grid, find_ranged_interval
from .simulate import ImpulseSequence, TrajectorySegment, simulate
from .system import (
    Applicability,
    ConvexCombination,
    DwellTimeSpec,
    ImpulsiveSystem,
    classify,
    instantiate,
    load_system,
    load_system_file,
    sampled_data_embed,
)

__all__ = [
    "__version__",
    "Verdict",
    "alpha_stability_constants",
    "arbitrary_impulses",
    "maximal_dwell_alt",
    "maximal_dwell_lemma",
    "maximal_dwell_looped",
    "minimal_dwell_lemma",
    "minimal_dwell_looped",
    "periodic_lmi",
    "periodic_looped",
    "periodic_spectral",
    "ranged_lemma_grid",
    "ranged_looped",
    "robust_maximal",
    "robust_minimal",
    "robust_periodic",
    "robust_ranged",
    "DEFAULT_CONFIG",
    "NumericConfig",
    "BoundaryResult",
    "bisect_boundary",
    "eig_oracle_grid",
    "find_ranged_interval",
    "ImpulseSequence",
    "TrajectorySegment",
    "simulate",
    "Applicability",
    "ConvexCombination",
    "DwellTimeSpec",
    "ImpulsiveSystem",
    "classify",
    "instantiate",
    "load_system",
    "load_system_file",
    "sampled_data_embed",
]
