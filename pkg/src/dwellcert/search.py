"""Feasibility-boundary location and brute-force spectral oracles.

Bisection assumes the certified-dwell set within the bracket is an
interval; a pre-scan checks that assumption and aborts with diagnostics
instead of silently returning a wrong boundary.  Returned bounds are
always the last *certified* probe, so they can be quoted as proven.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG, NumericConfig
from .errors import BracketError, UsageError
from .linalg import expm, spectral_radius
from .system import ConvexCombination, ImpulsiveSystem, instantiate

__all__ = [
    "BoundaryResult",
    "bisect_boundary",
    "find_ranged_interval",
    "eig_oracle_grid",
    "default_bracket",
]


@dataclass
class BoundaryResult:
    """A located feasibility boundary with its probe history."""

    bound: float
    direction: str              # "max-feasible-T" | "min-feasible-T"
    bracket: tuple[float, float]
    tol: float
    probes: list[tuple[float, bool]] = field(default_factory=list)

    @property
    def feasible_probes(self) -> list[float]:
        return [t for t, ok in self.probes if ok]

    @property
    def infeasible_probes(self) -> list[float]:
        return [t for t, ok in self.probes if not ok]


def _as_bool(verdict) -> bool:
    return bool(getattr(verdict, "stable", verdict))


def bisect_boundary(test, bracket: tuple[float, float], tol: float | None = None,
                    prescan: int = 20,
                    config: NumericConfig = DEFAULT_CONFIG) -> BoundaryResult:
    """Locate where ``test`` flips between feasible and infeasible.

    ``test`` maps a dwell to a verdict (or bool).  The endpoints must
    disagree.  ``prescan`` extra evaluations across the bracket guard
    against a non-interval feasible set; the scan also tightens the
    starting bracket.  The returned bound is the last feasible probe, at
    most ``tol`` away from the true boundary of the probed predicate.
    """
    tol = config.bisect_tol if tol is None else tol
    if tol <= 0:
        raise UsageError(f"tol must be positive, got {tol}")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
        raise UsageError(f"bracket must be finite with lo < hi, got {bracket}")
    probes: list[tuple[float, bool]] = []

    def probe(t: float) -> bool:
        ok = _as_bool(test(t))
        probes.append((t, ok))
        return ok

    n_scan = max(int(prescan), 2)
    ts = np.linspace(lo, hi, n_scan)
    flags = [probe(t) for t in ts]
    if flags[0] == flags[-1]:
        raise BracketError(
            f"test agrees at both endpoints of {bracket}: "
            f"feasible={flags[0]} at both ends")
    switches = [i for i in range(len(flags) - 1) if flags[i] != flags[i + 1]]
    if len(switches) != 1:
        raise BracketError(
            "feasible set is not an interval within the bracket; "
            f"prescan pattern: {''.join('F' if f else '.' for f in flags)}")
    i = switches[0]
    a, b = ts[i], ts[i + 1]
    a_ok = flags[i]
    direction = "max-feasible-T" if a_ok else "min-feasible-T"
    feas, infeas = (a, b) if a_ok else (b, a)
    while abs(infeas - feas) > tol:
        mid = 0.5 * (feas + infeas)
        if probe(mid):
            feas = mid
        else:
            infeas = mid
    return BoundaryResult(bound=feas, direction=direction,
                          bracket=(lo, hi), tol=tol, probes=probes)


def default_bracket(sys: ImpulsiveSystem) -> tuple[float, float]:
    """Heuristic dwell bracket scaled by the flow magnitude."""
    a_norm = max(float(np.linalg.norm(V, 2)) for V in sys.A_vertices)
    return (1e-3, 10.0 / max(1.0, a_norm))


@dataclass
class RangedInterval:
    """A certified dwell interval with the two boundary searches behind it."""

    Tmin: float
    Tmax: float
    down: BoundaryResult
    up: BoundaryResult

    def as_tuple(self) -> tuple[float, float]:
        return (self.Tmin, self.Tmax)


def find_ranged_interval(test, T_seed: float, tol: float | None = None,
                         bracket: tuple[float, float] | None = None,
                         joint: bool = False, prescan: int = 20,
                         config: NumericConfig = DEFAULT_CONFIG) -> RangedInterval:
    """Expand a feasible dwell interval down and up from a seed.

    With ``joint=False`` the test is a per-dwell predicate ``test(T)`` and
    the two boundaries are independent bisections.  With ``joint=True`` the
    test is an interval predicate ``test(Tmin, Tmax)``; the lower end is
    expanded first with the upper end pinned at the seed, then the upper
    end is expanded with the lower end pinned at the found bound, so the
    final pair was itself probed feasible (a joint certificate).
    """
    tol = config.bisect_tol if tol is None else tol
    if bracket is None:
        raise UsageError("an explicit bracket (lo, hi) is required")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (lo < T_seed < hi):
        raise UsageError(f"seed {T_seed} must lie inside the bracket {bracket}")

    if joint:
        if not _as_bool(test(T_seed, T_seed)):
            raise UsageError(f"test is infeasible at the seed {T_seed}")
        down = bisect_boundary(lambda t: test(t, T_seed), (lo, T_seed),
                               tol=tol, prescan=prescan, config=config)
        a = down.bound
        up = bisect_boundary(lambda t: test(a, t), (T_seed, hi),
                             tol=tol, prescan=prescan, config=config)
        return RangedInterval(Tmin=a, Tmax=up.bound, down=down, up=up)

    if not _as_bool(test(T_seed)):
        raise UsageError(f"test is infeasible at the seed {T_seed}")
    down = bisect_boundary(test, (lo, T_seed), tol=tol, prescan=prescan,
                           config=config)
    up = bisect_boundary(test, (T_seed, hi), tol=tol, prescan=prescan,
                         config=config)
    return RangedInterval(Tmin=down.bound, Tmax=up.bound, down=down, up=up)


def eig_oracle_grid(sys: ImpulsiveSystem, T: float,
                    points_per_dim: int = 11) -> float:
    """Worst one-cycle spectral radius over a sampled uncertainty grid.

    Gridding is evidence about the whole polytope, not a proof; vertex
    combinations are always included in the sample.
    """
    from .analysis import simplex_grid

    if points_per_dim < 2 and (len(sys.A_vertices) > 1 or len(sys.J_vertices) > 1):
        raise UsageError("need at least 2 grid points per simplex dimension")
    worst = 0.0
    for wa in simplex_grid(len(sys.A_vertices), points_per_dim):
        for wj in simplex_grid(len(sys.J_vertices), points_per_dim):
            A, J = instantiate(sys, ConvexCombination(wa, wj))
            worst = max(worst, spectral_radius(expm(A, T) @ J))
    return worst
