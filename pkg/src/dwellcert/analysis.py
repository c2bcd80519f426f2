"""Dwell-time stability procedures returning checkable verdicts.

Each procedure poses the matrix inequalities of one stability condition,
solves the resulting feasibility problem and, on success, re-verifies the
claimed consequences of the certificate (impulsive-operator negativity on
the required parameter grids) before declaring the system stable.  All
conditions are sufficient only, so a failed solve yields ``unknown``,
never ``unstable``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import DEFAULT_CONFIG, NumericConfig
from .errors import UsageError
from .linalg import expm, max_eig, min_eig, spectral_radius
from .lmi import (
    LoopVarNames,
    VarRegistry,
    add_loop_vars,
    assemble_problem,
    build_nominal_blocks,
    build_robust_blocks,
    nominal_registry,
    op_C,
    op_D,
    op_I_schur,
)
from .sdp import Certificate, SolveReport, SolverOptions, extract, solve
from .system import ConvexCombination, ImpulsiveSystem, instantiate

__all__ = [
    "Verdict",
    "continuous_lyap",
    "discrete_lyap",
    "impulsive_lyap",
    "periodic_spectral",
    "periodic_lmi",
    "periodic_looped",
    "minimal_dwell_lemma",
    "minimal_dwell_looped",
    "arbitrary_impulses",
    "maximal_dwell_lemma",
    "maximal_dwell_looped",
    "maximal_dwell_alt",
    "ranged_lemma_grid",
    "ranged_looped",
    "robust_periodic",
    "robust_minimal",
    "robust_maximal",
    "robust_ranged",
    "alpha_stability_constants",
    "simplex_grid",
]


@dataclass
class Verdict:
    """Outcome of one stability query: certified stable or unknown."""

    stable: bool
    method: str
    certificate: Certificate | None = None
    diagnostics: dict = field(default_factory=dict)
    solve_report: SolveReport | None = None

    def __bool__(self) -> bool:
        return self.stable


def continuous_lyap(P, A) -> np.ndarray:
    """Flow-direction Lyapunov derivative ``A^T P + P A``."""
    return A.T @ P + P @ A


def discrete_lyap(P, J) -> np.ndarray:
    """Jump-map Lyapunov difference ``J^T P J - P``."""
    return J.T @ P @ J - P


def impulsive_lyap(P, A, J, T: float) -> np.ndarray:
    """One-cycle Lyapunov difference ``J^T e^(A^T T) P e^(A T) J - P``."""
    M = expm(A, T) @ J
    return M.T @ P @ M - P


def _unknown(method: str, report=None, **diag) -> Verdict:
    return Verdict(stable=False, method=method, diagnostics=diag,
                   solve_report=report)


def _solve_and_extract(blocks, reg, config, labels=None):
    prob = assemble_problem(blocks, reg, config, labels=labels)
    report = solve(prob, SolverOptions.from_config(config))
    cert = extract(report, reg) if report.feasible else None
    return report, cert


# ---------------------------------------------------------------------------
# periodic impulses

def periodic_spectral(A, J, T: float,
                      config: NumericConfig = DEFAULT_CONFIG) -> Verdict:
    """Exact periodic test: spectral radius of the one-cycle map below one."""
    if T <= 0:
        raise UsageError(f"T must be positive, got {T}")
    radius = spectral_radius(expm(A, T) @ J)
    stable = radius < 1.0 - config.delta_eig
    return Verdict(stable=stable, method="periodic-spectral",
                   diagnostics={"radius": radius})


def periodic_lmi(A, J, T: float,
                 config: NumericConfig = DEFAULT_CONFIG) -> Verdict:
    """Periodic test through the Schur form of the impulsive operator."""
    A = np.asarray(A, dtype=float)
    reg = VarRegistry()
    reg.add_symmetric("P", A.shape[0], positive=True)
    report, cert = _solve_and_extract(
        [op_I_schur(A, J, T, reg)], reg, config, labels=["impulsive-schur"])
    if cert is None:
        return _unknown("periodic-lmi", report)
    residual = max_eig(impulsive_lyap(cert.P, A, J, T))
    return Verdict(stable=residual < 0, method="periodic-lmi",
                   certificate=cert, solve_report=report,
                   diagnostics={"impulsive_residual": residual})


def periodic_looped(A, J, T: float,
                    config: NumericConfig = DEFAULT_CONFIG) -> Verdict:
    """Periodic test via the looped-functional vertex inequalities.

    Exponential-free and affine in the dwell, at the price of sufficiency
    only.  A feasible certificate is re-checked against the one-cycle
    operator it implies.
    """
    A = np.asarray(A, dtype=float)
    reg = nominal_registry(A.shape[0])
    psi, phi = build_nominal_blocks(A, J, T, reg)
    report, cert = _solve_and_extract(
        [psi, phi], reg, config, labels=["start-vertex", "end-vertex"])
    if cert is None:
        return _unknown("periodic-looped", report)
    residual = max_eig(impulsive_lyap(cert.P, A, J, T))
    return Verdict(stable=residual < 0, method="periodic-looped",
                   certificate=cert, solve_report=report,
                   diagnostics={"impulsive_residual": residual})


# ---------------------------------------------------------------------------
# minimal dwell time and arbitrary sequences

def minimal_dwell_lemma(A, J, T: float,
                        config: NumericConfig = DEFAULT_CONFIG) -> Verdict:
    """Certify all dwells >= T: decreasing flow plus one-cycle contraction."""
    A = np.asarray(A, dtype=float)
    reg = VarRegistry()
    reg.add_symmetric("P", A.shape[0], positive=True)
    report, cert = _solve_and_extract(
        [op_C(A, reg), op_I_schur(A, J, T, reg)], reg, config,
        labels=["flow-decrease", "impulsive-schur"])
    if cert is None:
        return _unknown("minimal-lemma", report)
    diag = {
        "impulsive_residual": max_eig(impulsive_lyap(cert.P, A, J, T)),
        "flow_residual": max_eig(continuous_lyap(cert.P, A)),
    }
    stable = diag["impulsive_residual"] < 0 and diag["flow_residual"] < 0
    return Verdict(stable=stable, method="minimal-lemma", certificate=cert,
                   solve_report=report, diagnostics=diag)


def minimal_dwell_looped(A, J, T: float,
                         config: NumericConfig = DEFAULT_CONFIG) -> Verdict:
    """Minimal dwell time via the vertex inequalities plus flow decrease."""
    A = np.asarray(A, dtype=float)
    reg = nominal_registry(A.shape[0])
    psi, phi = build_nominal_blocks(A, J, T, reg)
    report, cert = _solve_and_extract(
        [psi, phi, op_C(A, reg)], reg, config,
        labels=["start-vertex", "end-vertex", "flow-decrease"])
    if cert is None:
        return _unknown("minimal-looped", report)
    diag = {
        "impulsive_residual": max_eig(impulsive_lyap(cert.P, A, J, T)),
        "flow_residual": max_eig(continuous_lyap(cert.P, A)),
    }
    stable = diag["impulsive_residual"] < 0 and diag["flow_residual"] < 0
    return Verdict(stable=stable, method="minimal-looped", certificate=cert,
                   solve_report=report, diagnostics=diag)


def arbitrary_impulses(A, J,
                       config: NumericConfig = DEFAULT_CONFIG) -> Verdict:
    """Certify stability for any impulse sequence: both operators decrease."""
    A = np.asarray(A, dtype=float)
    reg = VarRegistry()
    reg.add_symmetric("P", A.shape[0], positive=True)
    report, cert = _solve_and_extract(
        [op_C(A, reg), op_D(J, reg)], reg, config,
        labels=["flow-decrease", "jump-decrease"])
    if cert is None:
        return _unknown("arbitrary", report)
    diag = {
        "flow_residual": max_eig(continuous_lyap(cert.P, A)),
        "jump_residual": max_eig(discrete_lyap(cert.P, J)),
    }
    stable = diag["flow_residual"] < 0 and diag["jump_residual"] < 0
    return Verdict(stable=stable, method="arbitrary", certificate=cert,
                   solve_report=report, diagnostics=diag)


# ---------------------------------------------------------------------------
# maximal dwell time

def maximal_dwell_lemma(A, J, T: float,
                        config: NumericConfig = DEFAULT_CONFIG) -> Verdict:
    """Certify all dwells <= T: expanding flow plus one-cycle contraction."""
    A = np.asarray(A, dtype=float)
    reg = VarRegistry()
    reg.add_symmetric("P", A.shape[0], positive=True)
    report, cert = _solve_and_extract(
        [op_C(A, reg).negated(), op_I_schur(A, J, T, reg)], reg, config,
        labels=["flow-increase", "impulsive-schur"])
    if cert is None:
        return _unknown("maximal-lemma", report)
    # residual convention: the reported value must be negative, so the
    # flow-increase requirement enters through its negated operator
    diag = {
        "impulsive_residual": max_eig(impulsive_lyap(cert.P, A, J, T)),
        "flow_residual": -min_eig(continuous_lyap(cert.P, A)),
    }
    stable = diag["impulsive_residual"] < 0 and diag["flow_residual"] < 0
    return Verdict(stable=stable, method="maximal-lemma", certificate=cert,
                   solve_report=report, diagnostics=diag)


def maximal_dwell_looped(A, J, T: float,
                         config: NumericConfig = DEFAULT_CONFIG) -> Verdict:
    """Maximal dwell time via the vertex inequalities plus flow increase."""
    A = np.asarray(A, dtype=float)
    reg = nominal_registry(A.shape[0])
    psi, phi = build_nominal_blocks(A, J, T, reg)
    report, cert = _solve_and_extract(
        [psi, phi, op_C(A, reg).negated()], reg, config,
        labels=["start-vertex", "end-vertex", "flow-increase"])
    if cert is None:
        return _unknown("maximal-looped", report)
    diag = {
        "impulsive_residual": max_eig(impulsive_lyap(cert.P, A, J, T)),
        "flow_residual": -min_eig(continuous_lyap(cert.P, A)),
    }
    stable = diag["impulsive_residual"] < 0 and diag["flow_residual"] < 0
    return Verdict(stable=stable, method="maximal-looped", certificate=cert,
                   solve_report=report, diagnostics=diag)


def maximal_dwell_alt(A, J, T: float,
                      config: NumericConfig = DEFAULT_CONFIG) -> Verdict:
    """Maximal dwell time with contracting jumps instead of expanding flow."""
    A = np.asarray(A, dtype=float)
    reg = nominal_registry(A.shape[0])
    psi, phi = build_nominal_blocks(A, J, T, reg)
    report, cert = _solve_and_extract(
        [psi, phi, op_D(J, reg)], reg, config,
        labels=["start-vertex", "end-vertex", "jump-decrease"])
    if cert is None:
        return _unknown("maximal-alt", report)
    diag = {
        "impulsive_residual": max_eig(impulsive_lyap(cert.P, A, J, T)),
        "jump_residual": max_eig(discrete_lyap(cert.P, J)),
    }
    stable = diag["impulsive_residual"] < 0 and diag["jump_residual"] < 0
    return Verdict(stable=stable, method="maximal-alt", certificate=cert,
                   solve_report=report, diagnostics=diag)


# ---------------------------------------------------------------------------
# ranged dwell time

def ranged_lemma_grid(A, J, Tmin: float, Tmax: float, grid: int = 50,
                      config: NumericConfig = DEFAULT_CONFIG) -> Verdict:
    """Shared-P one-cycle contraction on a dwell grid.

    Grid feasibility is evidence, not a proof: the operator is only checked
    at the sampled dwells.  The verdict records the grid density used.
    """
    if not (0 < Tmin <= Tmax):
        raise UsageError(f"need 0 < Tmin <= Tmax, got ({Tmin}, {Tmax})")
    if grid < 1:
        raise UsageError("grid must have at least one point")
    A = np.asarray(A, dtype=float)
    reg = VarRegistry()
    reg.add_symmetric("P", A.shape[0], positive=True)
    thetas = [Tmin] if Tmin == Tmax else list(np.linspace(Tmin, Tmax, max(grid, 2)))
    blocks = [op_I_schur(A, J, th, reg) for th in thetas]
    report, cert = _solve_and_extract(
        blocks, reg, config,
        labels=[f"impulsive-schur@{th:.6g}" for th in thetas])
    if cert is None:
        return _unknown("ranged-lemma-grid", report, grid=len(thetas))
    worst = max(max_eig(impulsive_lyap(cert.P, A, J, th)) for th in thetas)
    return Verdict(stable=worst < 0, method="ranged-lemma-grid",
                   certificate=cert, solve_report=report,
                   diagnostics={"impulsive_residual": worst,
                                "grid": len(thetas),
                                "evidence": "grid"})


def ranged_looped(A, J, Tmin: float, Tmax: float,
                  config: NumericConfig = DEFAULT_CONFIG,
                  verify_grid: int | None = None) -> Verdict:
    """Certify dwells in [Tmin, Tmax] via endpoint vertex inequalities.

    One Lyapunov matrix is shared across the interval while each endpoint
    carries its own functional variable set.  On success the certificate is
    re-verified by sweeping the one-cycle operator over a dwell grid, which
    is the property the certificate is used for.
    """
    if not (0 < Tmin <= Tmax):
        raise UsageError(f"need 0 < Tmin <= Tmax, got ({Tmin}, {Tmax})")
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    grid = config.grid_interval if verify_grid is None else verify_grid
    if Tmin == Tmax:
        verdict = periodic_looped(A, J, Tmin, config)
        verdict.method = "ranged-looped"
        verdict.diagnostics["grid"] = 1
        return verdict
    reg = VarRegistry()
    reg.add_symmetric("P", n, positive=True)
    blocks, labels = [], []
    for tag, T in (("lo", Tmin), ("hi", Tmax)):
        names = LoopVarNames.suffixed(tag)
        add_loop_vars(reg, n, names)
        psi, phi = build_nominal_blocks(A, J, T, reg, names=names)
        blocks += [psi, phi]
        labels += [f"start-vertex@{tag}", f"end-vertex@{tag}"]
    report, cert = _solve_and_extract(blocks, reg, config, labels=labels)
    if cert is None:
        return _unknown("ranged-looped", report)
    thetas = np.linspace(Tmin, Tmax, max(grid, 2))
    worst = max(max_eig(impulsive_lyap(cert.P, A, J, th)) for th in thetas)
    return Verdict(stable=worst < 0, method="ranged-looped",
                   certificate=cert, solve_report=report,
                   diagnostics={"impulsive_residual": worst,
                                "grid": len(thetas)})


# ---------------------------------------------------------------------------
# robust (polytopic) analyses

def simplex_grid(n_vertices: int, points: int) -> list[tuple[float, ...]]:
    """Lattice of weight vectors on the unit simplex, ``points`` per edge."""
    if n_vertices < 1 or points < 1:
        raise UsageError("need at least one vertex and one point")
    if n_vertices == 1:
        return [(1.0,)]
    steps = points - 1
    if steps == 0:
        return [tuple(1.0 / n_vertices for _ in range(n_vertices))]
    out = []
    for comp in itertools.combinations(range(steps + n_vertices - 1),
                                       n_vertices - 1):
        parts = []
        prev = -1
        for c in comp:
            parts.append(c - prev - 1)
            prev = c
        parts.append(steps + n_vertices - 2 - prev)
        out.append(tuple(p / steps for p in parts))
    return out


def _robust_worst_residual(sys: ImpulsiveSystem, P: np.ndarray,
                           thetas, n_simplex: int) -> float:
    """Max one-cycle residual over the sampled uncertainty set and dwells."""
    worst = -np.inf
    a_grid = simplex_grid(len(sys.A_vertices), n_simplex)
    j_grid = simplex_grid(len(sys.J_vertices), n_simplex)
    for wa in a_grid:
        for wj in j_grid:
            A, J = instantiate(sys, ConvexCombination(wa, wj))
            for th in thetas:
                worst = max(worst, max_eig(impulsive_lyap(P, A, J, th)))
    return worst


def _robust_blocks(sys: ImpulsiveSystem, T: float, reg: VarRegistry,
                   tag_prefix: str = ""):
    blocks, labels = [], []
    suffix = f"@{tag_prefix}" if tag_prefix else ""
    for j, Jj in enumerate(sys.J_vertices):
        tag = f"{tag_prefix}{j}"
        for i, Ai in enumerate(sys.A_vertices):
            psi, phi = build_robust_blocks(Ai, Jj, T, reg, tag=tag)
            blocks += [psi, phi]
            labels += [f"start-vertex@a{i}j{j}{suffix}",
                       f"end-vertex@a{i}j{j}{suffix}"]
    return blocks, labels


def _robust_registry_for(sys: ImpulsiveSystem, tag_prefixes=("",)) -> VarRegistry:
    reg = VarRegistry()
    reg.add_symmetric("P", sys.n, positive=True)
    for prefix in tag_prefixes:
        for j in range(len(sys.J_vertices)):
            add_loop_vars(reg, sys.n, LoopVarNames.suffixed(f"{prefix}{j}"))
    return reg


def robust_periodic(sys: ImpulsiveSystem, T: float,
                    config: NumericConfig = DEFAULT_CONFIG,
                    verify: bool = True) -> Verdict:
    """Periodic stability of the whole uncertainty polytope at period T."""
    reg = _robust_registry_for(sys)
    blocks, labels = _robust_blocks(sys, T, reg)
    report, cert = _solve_and_extract(blocks, reg, config, labels=labels)
    if cert is None:
        return _unknown("robust-periodic", report)
    diag = {"grid": config.grid_simplex}
    stable = True
    if verify:
        worst = _robust_worst_residual(sys, cert.P, [T], config.grid_simplex)
        diag["impulsive_residual"] = worst
        stable = worst < 0
    return Verdict(stable=stable, method="robust-periodic", certificate=cert,
                   solve_report=report, diagnostics=diag)


def _robust_dwell(sys, T, config, verify, sense: str) -> Verdict:
    method = f"robust-{'minimal' if sense == 'minimal' else 'maximal'}"
    reg = _robust_registry_for(sys)
    blocks, labels = _robust_blocks(sys, T, reg)
    for i, Ai in enumerate(sys.A_vertices):
        flow = op_C(Ai, reg)
        blocks.append(flow if sense == "minimal" else flow.negated())
        labels.append(f"flow-{'decrease' if sense == 'minimal' else 'increase'}@a{i}")
    report, cert = _solve_and_extract(blocks, reg, config, labels=labels)
    if cert is None:
        return _unknown(method, report)
    diag = {"grid": config.grid_simplex}
    stable = True
    if verify:
        worst = _robust_worst_residual(sys, cert.P, [T], config.grid_simplex)
        flows = [max_eig(continuous_lyap(cert.P, Ai)) if sense == "minimal"
                 else -min_eig(continuous_lyap(cert.P, Ai))
                 for Ai in sys.A_vertices]
        diag["impulsive_residual"] = worst
        diag["flow_residual"] = max(flows)
        stable = worst < 0 and max(flows) < 0
    return Verdict(stable=stable, method=method, certificate=cert,
                   solve_report=report, diagnostics=diag)


def robust_minimal(sys: ImpulsiveSystem, T: float,
                   config: NumericConfig = DEFAULT_CONFIG,
                   verify: bool = True) -> Verdict:
    """Robust minimal dwell time: vertex inequalities plus decreasing flow."""
    return _robust_dwell(sys, T, config, verify, "minimal")


def robust_maximal(sys: ImpulsiveSystem, T: float,
                   config: NumericConfig = DEFAULT_CONFIG,
                   verify: bool = True) -> Verdict:
    """Robust maximal dwell time: vertex inequalities plus increasing flow."""
    return _robust_dwell(sys, T, config, verify, "maximal")


def robust_ranged(sys: ImpulsiveSystem, Tmin: float, Tmax: float,
                  config: NumericConfig = DEFAULT_CONFIG,
                  verify: bool = True,
                  verify_grid: int | None = None) -> Verdict:
    """Robust dwells in [Tmin, Tmax]: endpoint inequalities, shared P.

    Each (endpoint, jump-vertex) pair carries its own functional variable
    set; the single shared Lyapunov matrix is what the grid verification
    sweeps over dwell and both polytopes.
    """
    if not (0 < Tmin <= Tmax):
        raise UsageError(f"need 0 < Tmin <= Tmax, got ({Tmin}, {Tmax})")
    if Tmin == Tmax:
        verdict = robust_periodic(sys, Tmin, config, verify=verify)
        verdict.method = "robust-ranged"
        return verdict
    reg = _robust_registry_for(sys, tag_prefixes=("lo", "hi"))
    blocks, labels = [], []
    for prefix, T in (("lo", Tmin), ("hi", Tmax)):
        b, l = _robust_blocks(sys, T, reg, tag_prefix=prefix)
        blocks += b
        labels += l
    report, cert = _solve_and_extract(blocks, reg, config, labels=labels)
    if cert is None:
        return _unknown("robust-ranged", report)
    grid = config.grid_interval if verify_grid is None else verify_grid
    diag = {"grid": grid, "grid_simplex": config.grid_simplex}
    stable = True
    if verify:
        thetas = np.linspace(Tmin, Tmax, max(grid, 2))
        worst = _robust_worst_residual(sys, cert.P, thetas, config.grid_simplex)
        diag["impulsive_residual"] = worst
        stable = worst < 0
    return Verdict(stable=stable, method="robust-ranged", certificate=cert,
                   solve_report=report, diagnostics=diag)


# ---------------------------------------------------------------------------
# decay-rate comparison constants

def alpha_stability_constants(A, J, P) -> tuple[float, float]:
    """Tightest decay constants (c, d) for a fixed Lyapunov matrix P.

    c bounds the flow direction through ``A^T P + P A <= -c P`` and d the
    jumps through ``J^T P J - P <= (e^(-d) - 1) P``; both are computed
    exactly from symmetric generalized eigenvalue problems against P.
    Positive values certify decay; for many systems only negative values
    exist, which makes this style of test inconclusive there.
    """
    A = np.asarray(A, dtype=float)
    J = np.asarray(J, dtype=float)
    P = np.asarray(P, dtype=float)
    if min_eig(P) <= 0:
        raise UsageError("P must be positive definite")
    flow_max = float(scipy.linalg.eigh(continuous_lyap(P, A), P,
                                       eigvals_only=True)[-1])
    jump_max = float(scipy.linalg.eigh(discrete_lyap(P, J), P,
                                       eigvals_only=True)[-1])
    c = -flow_max
    if 1.0 + jump_max <= 0:
        raise UsageError("jump difference reaches -P; decay constant undefined")
    d = -float(np.log1p(jump_max))
    return c, d
