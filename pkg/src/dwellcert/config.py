"""Centralized numeric configuration.

Every tolerance used anywhere in the package lives in one frozen record so
that runs are reproducible and reports can echo the exact profile they ran
under.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class NumericConfig:
    """Tolerance and limit profile shared by all modules.

    Attributes
    ----------
    delta_eig : float
        Strictness margin for eigenvalue predicates (Hurwitz/Schur tests).
        A vertex within ``delta_eig`` of the boundary is classified
        conservatively as "otherwise".
    eps_dwell : float
        Smallest admissible dwell time; all dwell bounds must exceed it.
    eps_pd : float
        Positive-definiteness floor: flagged variable blocks must satisfy
        ``X >= eps_pd * I``.
    eps_strict : float
        Quantitative margin realizing strict matrix inequalities:
        ``F(y) < 0`` is certified as ``F(y) <= -eps_strict * I``.
    tol_solve : float
        Target primal-dual gap on the epigraph variable of the
        min-lambda-max feasibility program.
    y_cap : float
        Internal per-coordinate bound on decision scalars; makes the
        epigraph objective bounded below.
    max_scalars : int
        Refuse problems with more decision scalars than this.
    bisect_tol : float
        Default absolute tolerance for feasibility-boundary bisection.
    grid_interval : int
        Default number of verification points per interval dimension.
    grid_simplex : int
        Default number of verification points per polytope-weight dimension.
    quad_rel_tol : float
        Relative tolerance for the quadrature used in functional evaluation.
    """

    delta_eig: float = 1e-9
    eps_dwell: float = 1e-8
    eps_pd: float = 1e-6
    eps_strict: float = 1e-6
    tol_solve: float = 1e-8
    y_cap: float = 1e6
    max_scalars: int = 5000
    bisect_tol: float = 1e-4
    grid_interval: int = 100
    grid_simplex: int = 11
    quad_rel_tol: float = 1e-10

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_CONFIG = NumericConfig()
