"""Command-line front end: analyze, search, simulate, reproduce.

Every run emits a human-readable summary on stdout and, with ``--out``, a
JSON report that echoes all inputs, tolerances and seeds so the run can be
repeated exactly.  Exit codes for ``analyze``: 0 certified stable, 2
unknown, 1 usage or runtime error.

Environment overrides (the only ones honored): ``DWELLCERT_THREADS``
pins the BLAS/OpenMP thread count, ``DWELLCERT_PROFILE`` selects the
tolerance profile (``default`` | ``strict`` | ``loose``).
"""

from __future__ import annotations

import os

if "DWELLCERT_THREADS" in os.environ:
    # effective only if set before the numeric stack spins up its pools
    for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["DWELLCERT_THREADS"])

import argparse
import dataclasses
import json
import sys
import time

import numpy as np

from . import __version__, analysis, benchmarks
from .config import DEFAULT_CONFIG, NumericConfig
from .errors import DwellcertError
from .search import bisect_boundary, default_bracket, eig_oracle_grid, find_ranged_interval
from .simulate import (ImpulseSequence, empirical_stability,
                       lyapunov_trace, simulate, write_csv)
from .system import DwellTimeSpec, classify, load_system_file, system_to_document

SCHEMA_VERSION = 1

EXIT_STABLE = 0
EXIT_ERROR = 1
EXIT_UNKNOWN = 2

PROFILES = {
    "default": NumericConfig(),
    "strict": dataclasses.replace(NumericConfig(), tol_solve=1e-9,
                                  bisect_tol=1e-5, grid_interval=200),
    "loose": dataclasses.replace(NumericConfig(), tol_solve=1e-6,
                                 bisect_tol=1e-3, grid_interval=50),
}


def active_config() -> NumericConfig:
    name = os.environ.get("DWELLCERT_PROFILE", "default")
    try:
        return PROFILES[name]
    except KeyError:
        raise DwellcertError(
            f"unknown DWELLCERT_PROFILE {name!r}; "
            f"known: {sorted(PROFILES)}") from None


def _report_skeleton(command: str, inputs: dict,
                     config: NumericConfig = DEFAULT_CONFIG) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "dwellcert", "version": __version__},
        "command": command,
        "inputs": inputs,
        "config": config.as_dict(),
        "results": {},
        "timings": {},
    }


def _write_report(report: dict, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _parse_matrix_flag(text: str) -> np.ndarray:
    """Parse --P values like ``diag:2.3,1.4`` or ``identity``."""
    if text == "identity":
        raise ValueError("identity needs a dimension; use diag:1,1,...")
    if text.startswith("diag:"):
        vals = [float(v) for v in text[len("diag:"):].split(",") if v]
        if not vals:
            raise ValueError("diag: needs at least one value")
        return np.diag(vals)
    raise ValueError(f"unsupported matrix literal {text!r}; use diag:v1,v2,...")


def _verdict_payload(verdict: analysis.Verdict) -> dict:
    out = {
        "stable": verdict.stable,
        "method": verdict.method,
        "diagnostics": {k: (float(v) if isinstance(v, (int, float, np.floating))
                            else v)
                        for k, v in verdict.diagnostics.items()},
    }
    if verdict.certificate is not None:
        out["certificate"] = {k: np.asarray(v).tolist()
                              for k, v in verdict.certificate.variables.items()}
    if verdict.solve_report is not None:
        rep = verdict.solve_report
        out["solve"] = {
            "status": rep.status.value,
            "t_star": float(rep.t_star),
            "iterations": rep.iterations,
            "wall_time": rep.wall_time,
            "solver_status": rep.solver_status,
            "options": rep.options,
            "block_residuals": [float(r) for r in rep.block_residuals],
            "message": rep.message,
        }
    return out


_NOMINAL_METHODS = {
    "spectral": lambda A, J, a, c: analysis.periodic_spectral(A, J, a.T, c),
    "periodic-lmi": lambda A, J, a, c: analysis.periodic_lmi(A, J, a.T, c),
    "periodic-looped": lambda A, J, a, c: analysis.periodic_looped(A, J, a.T, c),
    "min-dt": lambda A, J, a, c: analysis.minimal_dwell_looped(A, J, a.T, c),
    "min-dt-lemma": lambda A, J, a, c: analysis.minimal_dwell_lemma(A, J, a.T, c),
    "max-dt": lambda A, J, a, c: analysis.maximal_dwell_looped(A, J, a.T, c),
    "max-dt-lemma": lambda A, J, a, c: analysis.maximal_dwell_lemma(A, J, a.T, c),
    "max-dt-alt": lambda A, J, a, c: analysis.maximal_dwell_alt(A, J, a.T, c),
    "arbitrary": lambda A, J, a, c: analysis.arbitrary_impulses(A, J, c),
    "ranged": lambda A, J, a, c: analysis.ranged_looped(A, J, a.Tmin, a.Tmax, c),
    "ranged-grid": lambda A, J, a, c: analysis.ranged_lemma_grid(
        A, J, a.Tmin, a.Tmax, grid=a.grid, config=c),
}

_ROBUST_METHODS = {
    "robust-periodic": lambda s, a, c: analysis.robust_periodic(s, a.T, c),
    "robust-min-dt": lambda s, a, c: analysis.robust_minimal(s, a.T, c),
    "robust-max-dt": lambda s, a, c: analysis.robust_maximal(s, a.T, c),
    "robust-ranged": lambda s, a, c: analysis.robust_ranged(s, a.Tmin, a.Tmax, c),
}

_DWELL_KIND = {
    "spectral": "periodic", "periodic-lmi": "periodic",
    "periodic-looped": "periodic", "robust-periodic": "periodic",
    "min-dt": "minimal", "min-dt-lemma": "minimal",
    "robust-min-dt": "minimal",
    "max-dt": "maximal", "max-dt-lemma": "maximal", "max-dt-alt": "maximal",
    "robust-max-dt": "maximal",
    "ranged": "ranged", "ranged-grid": "ranged", "robust-ranged": "ranged",
    "arbitrary": "arbitrary",
}


def _check_dwell_flags(args) -> None:
    kind = _DWELL_KIND.get(args.method)
    if kind is None:
        return  # unknown method; the dispatch below reports it
    if kind in ("periodic", "minimal", "maximal"):
        if args.T is None:
            raise DwellcertError(f"method {args.method} requires --T")
        DwellTimeSpec(kind, T=args.T)
    elif kind == "ranged":
        if args.Tmin is None or args.Tmax is None:
            raise DwellcertError(
                f"method {args.method} requires --Tmin and --Tmax")
        DwellTimeSpec.ranged(args.Tmin, args.Tmax)


def cmd_analyze(args) -> int:
    config = active_config()
    sys_model = load_system_file(args.system)
    inputs = {
        "system": system_to_document(sys_model),
        "system_file": args.system,
        "method": args.method,
        "T": args.T, "Tmin": args.Tmin, "Tmax": args.Tmax,
        "P": args.P,
    }
    report = _report_skeleton("analyze", inputs, config)
    t0 = time.perf_counter()

    if args.method == "alpha":
        if args.P is None:
            raise DwellcertError("method alpha requires --P diag:...")
        P = _parse_matrix_flag(args.P)
        c, d = analysis.alpha_stability_constants(sys_model.A, sys_model.J, P)
        report["results"] = {"c": c, "d": d, "conclusive": bool(c > 0 or d > 0)}
        report["timings"]["wall_time"] = time.perf_counter() - t0
        _write_report(report, args.out)
        print(f"decay constants at fixed P: c = {c:.4f}, d = {d:.4f}")
        print("conclusive" if (c > 0 or d > 0)
              else "inconclusive at this P (both constants negative)")
        return EXIT_STABLE if (c > 0 or d > 0) else EXIT_UNKNOWN

    _check_dwell_flags(args)
    if args.method in _ROBUST_METHODS:
        verdict = _ROBUST_METHODS[args.method](sys_model, args, config)
    elif args.method in _NOMINAL_METHODS:
        if not sys_model.is_nominal:
            raise DwellcertError(
                f"method {args.method} needs a nominal system; "
                f"this one has vertex counts "
                f"({len(sys_model.A_vertices)}, {len(sys_model.J_vertices)}); "
                "use a robust-* method or the eigenvalue oracle")
        verdict = _NOMINAL_METHODS[args.method](sys_model.A, sys_model.J,
                                                args, config)
    else:
        raise DwellcertError(f"unknown method {args.method!r}")

    report["results"] = _verdict_payload(verdict)
    report["results"]["applicability"] = classify(sys_model, config).flags()
    report["timings"]["wall_time"] = time.perf_counter() - t0
    _write_report(report, args.out)

    label = sys_model.label or args.system
    print(f"system   : {label}")
    print(f"method   : {verdict.method}")
    print(f"verdict  : {'stable (certified)' if verdict.stable else 'unknown'}")
    for key, val in verdict.diagnostics.items():
        if isinstance(val, (int, float, np.floating)):
            print(f"  {key:22s} = {val:.6g}")
        else:
            print(f"  {key:22s} = {val}")
    return EXIT_STABLE if verdict.stable else EXIT_UNKNOWN


def cmd_search(args) -> int:
    config = active_config()
    sys_model = load_system_file(args.system)
    inputs = {
        "system": system_to_document(sys_model),
        "system_file": args.system,
        "method": args.method,
        "bracket": args.bracket, "tol": args.tol, "seed": args.seed,
        "grid": args.grid,
    }
    report = _report_skeleton("search", inputs, config)
    t0 = time.perf_counter()
    tol = args.tol
    bracket = (tuple(float(v) for v in args.bracket.split(","))
               if args.bracket else default_bracket(sys_model))
    if len(bracket) != 2:
        raise DwellcertError("--bracket must be lo,hi")

    if args.method == "oracle":
        def test(T):
            return eig_oracle_grid(sys_model, T, args.grid) < 1.0
    elif args.method in _ROBUST_METHODS:
        def test(T, _m=args.method):
            ns = argparse.Namespace(T=T, Tmin=None, Tmax=None, grid=args.grid)
            return _ROBUST_METHODS[_m](sys_model, ns, config)
        if args.method == "robust-ranged":
            def test(a, b):
                return analysis.robust_ranged(sys_model, a, b, config,
                                              verify=False)
    elif args.method in _NOMINAL_METHODS:
        if not sys_model.is_nominal:
            raise DwellcertError(f"method {args.method} needs a nominal system")
        A, J = sys_model.A, sys_model.J
        if args.method == "ranged":
            def test(a, b):
                return analysis.ranged_looped(A, J, a, b, config,
                                              verify_grid=20)
        else:
            def test(T, _m=args.method):
                ns = argparse.Namespace(T=T, Tmin=None, Tmax=None, grid=args.grid)
                return _NOMINAL_METHODS[_m](A, J, ns, config)
    else:
        raise DwellcertError(f"unknown method {args.method!r}")

    joint = args.method in ("ranged", "robust-ranged")
    if args.seed is not None:
        interval = find_ranged_interval(test, args.seed, tol=tol,
                                        bracket=bracket, joint=joint,
                                        config=config)
        report["results"] = {
            "Tmin": interval.Tmin, "Tmax": interval.Tmax,
            "down_probes": interval.down.probes, "up_probes": interval.up.probes,
        }
        print(f"certified interval: [{interval.Tmin:.6f}, {interval.Tmax:.6f}]"
              f"  (tol {tol if tol is not None else config.bisect_tol})")
    else:
        if joint:
            raise DwellcertError(f"method {args.method} needs --seed for "
                                 "interval expansion")
        result = bisect_boundary(test, bracket, tol=tol, config=config)
        report["results"] = {
            "bound": result.bound, "direction": result.direction,
            "bracket": list(result.bracket), "tol": result.tol,
            "probes": result.probes,
        }
        print(f"boundary: {result.bound:.6f}  ({result.direction}, "
              f"tol {result.tol}, {len(result.probes)} probes)")
    report["timings"]["wall_time"] = time.perf_counter() - t0
    _write_report(report, args.out)
    return EXIT_STABLE


def _parse_sequence(text: str, horizon: int) -> ImpulseSequence:
    if text.startswith("periodic:"):
        return ImpulseSequence.periodic(float(text.split(":", 1)[1]), horizon)
    if text.startswith("random:"):
        parts = text.split(":", 1)[1].split(",")
        if len(parts) != 3:
            raise DwellcertError("--seq random needs Tmin,Tmax,seed")
        return ImpulseSequence.uniform_random(float(parts[0]), float(parts[1]),
                                              horizon, int(parts[2]))
    if text == "log":
        return ImpulseSequence.log_spaced(horizon)
    if text.startswith("file:"):
        with open(text.split(":", 1)[1], "r", encoding="utf-8") as fh:
            dwells = [float(tok) for tok in fh.read().split()]
        return ImpulseSequence.explicit(dwells)
    raise DwellcertError(f"unsupported sequence spec {text!r}")


def cmd_simulate(args) -> int:
    sys_model = load_system_file(args.system)
    if not sys_model.is_nominal:
        raise DwellcertError("simulation needs a nominal system")
    seq = _parse_sequence(args.seq, args.horizon)
    x0 = np.array([float(v) for v in args.x0.split(",")]) if args.x0 \
        else np.ones(sys_model.n)
    P = _parse_matrix_flag(args.P) if args.P else np.eye(sys_model.n)
    inputs = {
        "system": system_to_document(sys_model),
        "system_file": args.system,
        "seq": args.seq, "horizon": args.horizon,
        "x0": x0.tolist(), "P": P.tolist(),
        "samples": args.samples, "sequence_seed": seq.seed,
    }
    report = _report_skeleton("simulate", inputs, active_config())
    t0 = time.perf_counter()
    segments = simulate(sys_model.A, sys_model.J, x0, seq, args.samples)
    trace = lyapunov_trace(segments, P)
    csv_text = write_csv(segments, P)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    lower = trace.lower_envelope
    report["results"] = {
        "segments": len(segments),
        "lower_envelope": lower.tolist(),
        "upper_envelope": trace.upper_envelope.tolist(),
        "decreasing_lower_envelope": bool(np.all(np.diff(lower) < 0)),
        "csv_file": args.csv,
    }
    if len(segments) >= 10:
        report["results"]["summary"] = empirical_stability(segments)
    report["timings"]["wall_time"] = time.perf_counter() - t0
    _write_report(report, args.out)
    summary = report["results"].get("summary")
    if summary is not None:
        trend = (f"norm envelope decaying (fitted rate "
                 f"{summary['decay_rate']:+.3f}/impulse)"
                 if summary["decreasing_envelope"] else
                 f"norm envelope not decaying (fitted rate "
                 f"{summary['decay_rate']:+.3f}/impulse)")
    else:
        trend = ("lower envelope strictly decreasing"
                 if report["results"]["decreasing_lower_envelope"]
                 else "lower envelope not strictly decreasing")
    print(f"simulated {len(segments)} segments, "
          f"{args.samples} samples each; {trend}")
    if args.csv:
        print(f"trace written to {args.csv}")
    return EXIT_STABLE


def cmd_reproduce(args) -> int:
    config = active_config()
    t0 = time.perf_counter()
    rows = benchmarks.run_suite(args.suite, config)
    inputs = {"suite": args.suite}
    report = _report_skeleton("reproduce", inputs, config)
    width = max(len(r.name) for r in rows) + 2
    header = (f"{'suite':9s}{'check':{width}s}{'reference':>12s}"
              f"{'computed':>12s}{'tol':>10s}  result")
    print(header)
    print("-" * len(header))
    for r in rows:
        print(f"{r.suite:9s}{r.name:{width}s}{r.reference:>12.5f}"
              f"{r.computed:>12.5f}{r.tol:>10.2g}  "
              f"{'pass' if r.passed else 'FAIL'}"
              + (f"  [{r.note}]" if r.note and args.tol_report else ""))
    n_pass = sum(r.passed for r in rows)
    print(f"{n_pass}/{len(rows)} checks passed")
    report["results"] = {
        "rows": [{"suite": r.suite, "name": r.name, "reference": r.reference,
                  "computed": r.computed, "tol": r.tol, "passed": r.passed,
                  "note": r.note} for r in rows],
        "passed": n_pass, "total": len(rows),
    }
    report["timings"]["wall_time"] = time.perf_counter() - t0
    _write_report(report, args.out)
    return EXIT_STABLE if n_pass == len(rows) else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dwellcert",
        description="Certify dwell-time stability of linear impulsive systems")
    parser.add_argument("--version", action="version",
                        version=f"dwellcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="run one stability test")
    pa.add_argument("--system", required=True, help="system JSON file")
    pa.add_argument("--method", required=True)
    pa.add_argument("--T", type=float)
    pa.add_argument("--Tmin", type=float)
    pa.add_argument("--Tmax", type=float)
    pa.add_argument("--grid", type=int, default=50,
                    help="dwell grid size for ranged-grid")
    pa.add_argument("--P", help="fixed matrix literal, e.g. diag:2.36,1.47")
    pa.add_argument("--out", help="write JSON report here")
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("search", help="locate feasibility boundaries")
    ps.add_argument("--system", required=True)
    ps.add_argument("--method", required=True,
                    help="an analyze method or 'oracle'")
    ps.add_argument("--bracket", help="lo,hi")
    ps.add_argument("--tol", type=float, default=None)
    ps.add_argument("--seed", type=float, default=None,
                    help="expand an interval from this dwell instead of "
                         "bisecting one boundary")
    ps.add_argument("--grid", type=int, default=11,
                    help="oracle grid points per uncertainty dimension")
    ps.add_argument("--out", help="write JSON report here")
    ps.set_defaults(func=cmd_search)

    pm = sub.add_parser("simulate", help="simulate and trace a trajectory")
    pm.add_argument("--system", required=True)
    pm.add_argument("--seq", required=True,
                    help="periodic:T | random:Tmin,Tmax,seed | log | file:PATH")
    pm.add_argument("--horizon", type=int, default=30,
                    help="number of impulses")
    pm.add_argument("--x0", help="comma-separated initial state")
    pm.add_argument("--samples", type=int, default=20,
                    help="samples per segment")
    pm.add_argument("--P", help="quadratic-form matrix, e.g. diag:1,1")
    pm.add_argument("--csv", help="write the trace CSV here")
    pm.add_argument("--out", help="write JSON report here")
    pm.set_defaults(func=cmd_simulate)

    pr = sub.add_parser("reproduce", help="run the reference-value suites")
    pr.add_argument("--suite", default="all",
                    help="all | ex1 | ex2 | ex3 | ex4 | robust1 | robust2")
    pr.add_argument("--tol-report", action="store_true", dest="tol_report",
                    help="append per-row notes to the table")
    pr.add_argument("--out", help="write JSON report here")
    pr.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold that into the error code
        return EXIT_STABLE if exc.code in (0, None) else EXIT_ERROR
    try:
        return args.func(args)
    except DwellcertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
