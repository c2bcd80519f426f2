"""Strict feasibility of assembled matrix-inequality problems.

Feasibility is decided through the epigraph program

    minimize t   subject to   F_b(y) <= t * I  for every block b,
                              |y_k| <= y_cap,

solved with cvxopt's deterministic primal-dual interior-point SDP solver.
The original strict system is declared feasible when the optimum drives t
below the strictness margin; the minimizer is returned and independently
re-checked so that every reported certificate stands on its own.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers as cvx_solvers

from .config import DEFAULT_CONFIG, NumericConfig
from .errors import UsageError
from .linalg import max_eig, symmetrize
from .lmi import FeasibilityProblem, VarRegistry

__all__ = [
    "SolveStatus",
    "SolverOptions",
    "SolveReport",
    "Certificate",
    "solve",
    "extract",
    "block_residuals",
]


class SolveStatus(enum.Enum):
    STRICTLY_FEASIBLE = "strictly-feasible"
    INFEASIBLE = "infeasible"
    MARGINAL_OR_NUMERICAL = "marginal-or-numerical"


@dataclass(frozen=True)
class SolverOptions:
    """Echoable solver profile; defaults follow the shared numeric config."""

    tol_solve: float = DEFAULT_CONFIG.tol_solve
    y_cap: float = DEFAULT_CONFIG.y_cap
    max_scalars: int = DEFAULT_CONFIG.max_scalars
    max_iterations: int = 100

    @classmethod
    def from_config(cls, config: NumericConfig) -> "SolverOptions":
        return cls(tol_solve=config.tol_solve, y_cap=config.y_cap,
                   max_scalars=config.max_scalars)

    def as_dict(self) -> dict:
        return {"tol_solve": self.tol_solve, "y_cap": self.y_cap,
                "max_scalars": self.max_scalars,
                "max_iterations": self.max_iterations}


@dataclass
class SolveReport:
    """Outcome of one feasibility solve."""

    status: SolveStatus
    t_star: float
    y_star: np.ndarray | None
    block_residuals: list[float]
    iterations: int
    wall_time: float
    eps_strict: float
    solver_status: str
    options: dict = field(default_factory=dict)
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.status is SolveStatus.STRICTLY_FEASIBLE


@dataclass
class Certificate:
    """Named decision matrices certifying a feasible problem."""

    variables: dict[str, np.ndarray]

    @property
    def P(self) -> np.ndarray:
        return self.variables["P"]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.variables[name]

    def __contains__(self, name: str) -> bool:
        return name in self.variables


def block_residuals(prob: FeasibilityProblem, y: np.ndarray) -> list[float]:
    """Largest eigenvalue of every block at y, computed outside the solver."""
    return [max_eig(B(y)) for B in prob.blocks]


def _vec_col(M: np.ndarray) -> np.ndarray:
    return np.asarray(M, dtype=float).flatten(order="F")


def solve(prob: FeasibilityProblem, opts: SolverOptions | None = None) -> SolveReport:
    """Decide strict feasibility of all blocks of ``prob``.

    Statuses: strictly feasible when the epigraph optimum clears twice the
    strictness margin and the returned point re-verifies independently;
    infeasible when the optimum provably cannot reach the margin; marginal
    otherwise (including solver stalls, which are reported, never hidden).
    """
    opts = opts or SolverOptions()
    nvar = prob.registry.size
    if nvar == 0:
        raise UsageError("problem has no decision scalars")
    if nvar > opts.max_scalars:
        raise UsageError(
            f"problem has {nvar} scalars, above the cap {opts.max_scalars}")
    eps = prob.eps_strict

    # Epigraph variable t is the last coordinate of x = (y, t).
    Gs, hs = [], []
    for B in prob.blocks:
        cols = np.zeros((B.dim * B.dim, nvar + 1))
        for k, C in B.coeffs.items():
            cols[:, k] = _vec_col(C)
        cols[:, nvar] = _vec_col(-np.eye(B.dim))
        Gs.append(cvx_matrix(cols))
        hs.append(cvx_matrix(-B.constant))
    c = cvx_matrix(np.r_[np.zeros(nvar), 1.0])
    solver_options = {
        "show_progress": False,
        "abstol": opts.tol_solve,
        "reltol": opts.tol_solve,
        "maxiters": opts.max_iterations,
    }

    def attempt(cap: float):
        # per-coordinate cap on y keeps t bounded below
        Gl = np.zeros((2 * nvar, nvar + 1))
        Gl[:nvar, :nvar] = np.eye(nvar)
        Gl[nvar:, :nvar] = -np.eye(nvar)
        hl = cap * np.ones(2 * nvar)
        try:
            sol = cvx_solvers.sdp(c, Gl=cvx_matrix(Gl), hl=cvx_matrix(hl),
                                  Gs=Gs, hs=hs, options=solver_options)
            x = None if sol["x"] is None else np.array(sol["x"]).ravel()
            return sol["status"], int(sol.get("iterations", 0)), x, ""
        except (ArithmeticError, ValueError) as exc:
            return "error", 0, None, f"solver breakdown: {exc}"

    t0 = time.perf_counter()
    # Ill-conditioned problems can break the interior-point factorization at
    # a generous cap; retrying on a shrinking cap is deterministic and any
    # certificate found is re-verified below, so soundness is unaffected.
    ladder = [opts.y_cap, opts.y_cap * 1e-2, opts.y_cap * 1e-4]
    status = SolveStatus.MARGINAL_OR_NUMERICAL
    t_star, y, residuals = np.inf, None, []
    solver_status, iterations, message = "error", 0, ""
    for attempt_no, cap in enumerate(ladder):
        solver_status, iterations, x, message = attempt(cap)
        if attempt_no > 0 and x is not None:
            message = (message + "; " if message else "") + \
                f"cap reduced to {cap:g} after breakdown"
        if x is None:
            continue
        y = x[:nvar]
        t_star = float(x[nvar])
        residuals = block_residuals(prob, y)
        worst = max(residuals)
        if solver_status == "optimal":
            if t_star < -2.0 * eps and \
                    worst <= t_star + opts.tol_solve * max(1.0, abs(t_star)):
                status = SolveStatus.STRICTLY_FEASIBLE
            elif abs(t_star) <= 2.0 * eps:
                status = SolveStatus.MARGINAL_OR_NUMERICAL
            elif t_star >= -eps:
                status = SolveStatus.INFEASIBLE
            else:
                # optimum clears the margin but the iterate does not re-verify
                status = SolveStatus.MARGINAL_OR_NUMERICAL
                message = message or "iterate failed independent re-check"
            break
        # stalled run: trust only an independently verified certificate
        if worst < -2.0 * eps:
            status = SolveStatus.STRICTLY_FEASIBLE
            t_star = worst
            message = (message + "; " if message else "") + \
                f"stalled ({solver_status}); certificate re-verified"
            break
        status = SolveStatus.MARGINAL_OR_NUMERICAL
        message = (message + "; " if message else "") + \
            f"solver stalled with status {solver_status!r}"
    wall = time.perf_counter() - t0

    if y is None:
        return SolveReport(
            status=SolveStatus.MARGINAL_OR_NUMERICAL, t_star=np.inf,
            y_star=None, block_residuals=[], iterations=iterations,
            wall_time=wall, eps_strict=eps, solver_status=solver_status,
            options=opts.as_dict(), message=message or "no iterate returned")

    return SolveReport(status=status, t_star=t_star, y_star=y,
                       block_residuals=residuals, iterations=iterations,
                       wall_time=wall, eps_strict=eps,
                       solver_status=solver_status, options=opts.as_dict(),
                       message=message)


def extract(report: SolveReport, reg: VarRegistry) -> Certificate:
    """Reassemble the named matrices from a strictly feasible report."""
    if report.status is not SolveStatus.STRICTLY_FEASIBLE:
        raise UsageError(f"cannot extract a certificate from a {report.status.value} report")
    values = reg.unpack(report.y_star)
    for b in reg.blocks:
        if b.kind in ("sym", "diag"):
            values[b.name] = symmetrize(values[b.name])
    return Certificate(variables=values)
