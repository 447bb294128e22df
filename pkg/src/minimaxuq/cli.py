"""Command-line front end: ``minimaxuq validate|run --spec FILE``.

Exit codes: 0 when every solve converged with its certificate, 2 when a
best-found answer lacks one (e.g. duality gap above tolerance), 1 on error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .brittleness import demo_a, demo_b, midpoint_comparison, sandwich_check
from .confidence import optimal_confidence_interval
from .errors import MinimaxUQError, NotOrthogonal
from .game import compare_experiments, minimax_estimator, mix_estimators
from .ouq import BoundResult, certify, classify, lower_bound, upper_bound
from .risk import CandidateSet, Estimator, worst_case_error
from .specfile import ProblemSpec, build_estimator, validate

log = logging.getLogger("minimaxuq")

EXIT_OK, EXIT_ERROR, EXIT_UNCERTIFIED = 0, 1, 2


def _symbol(s):
    if isinstance(s, tuple):
        return [_symbol(x) for x in s]
    return s


def _estimator_table(est: Estimator) -> dict:
    if est.is_randomized:
        return {"randomized": True, "alphabet": [_symbol(s) for s in est.alphabet],
                "decisions": est.decisions.tolist(), "kernel": est.kernel.tolist()}
    return {"randomized": False, "alphabet": [_symbol(s) for s in est.alphabet], "values": est.values.tolist()}


def _bound(res: BoundResult) -> dict:
    out = {
        "value": res.value,
        "status": res.status,
        "extremizer": {"points": list(res.extremizer.support), "weights": list(res.extremizer.weights)},
        "trace": {"iterations": res.solver_trace.iterations, "restarts": res.solver_trace.restarts,
                  "best_restart": res.solver_trace.best_restart,
                  "best_per_restart": list(res.solver_trace.best_per_restart)},
    }
    if res.function_values is not None:
        out["function_values"] = list(res.function_values)
    return out


def _curve(header: list, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _restart_curve(bounds: dict) -> str:
    rows = []
    for sense, b in bounds.items():
        rows.extend((sense, i, float(v)) for i, v in enumerate(b["trace"]["best_per_restart"]))
    return _curve(["sense", "restart", "best_value"], rows)


def execute(spec: ProblemSpec) -> tuple[dict, dict, list]:
    """Run a validated spec; returns (results, csv curves by name, statuses)."""
    kind = spec.kind
    curves: dict = {}
    statuses: list = []

    if kind in ("ouq_bound", "certify"):
        bounds = {}
        if kind == "certify" or spec.sense in ("upper", "both"):
            bounds["upper"] = _bound(upper_bound(spec.a_set, spec.qoi, spec.solver))
        if kind == "certify" or spec.sense in ("lower", "both"):
            bounds["lower"] = _bound(lower_bound(spec.a_set, spec.qoi, spec.solver))
        statuses += [b["status"] for b in bounds.values()]
        curves["restarts"] = _restart_curve(bounds)
        results = dict(bounds)
        if kind == "certify":
            results["verdict"] = classify(bounds["lower"]["value"], bounds["upper"]["value"], spec.epsilon)
            results["epsilon"] = spec.epsilon
        return results, curves, statuses

    if kind == "brittleness_demo":
        if spec.instance is not None:
            pi, pi_dag, cset = demo_a() if spec.instance == "A" else demo_b()
        else:
            cset = CandidateSet.build(spec.candidates, spec.qoi, spec.data_maps[0])
            pi, pi_dag = spec.priors
        rep = sandwich_check(pi, pi_dag, cset)
        g = rep.gap
        results = {
            "ratio": rep.ratio, "lower_ok": rep.lower_ok, "upper_ok": rep.upper_ok,
            "sup_gap": rep.sup_gap, "null_mass": g.null_mass, "denominator": g.denominator,
            "phi_range": list(cset.phi_range),
            "risk_theta1": rep.risk_theta1, "risk_theta2": rep.risk_theta2,
            "witness_reproduced": rep.reproduced,
            "null_atoms": [{"symbol": _symbol(cset.alphabet[b]), "mass": float(m), "conditional_mean": float(c),
                            "y": float(y), "z": float(z)}
                           for b, m, c, y, z in zip(g.null_atoms, g.atom_mass, g.atom_mean,
                                                    g.y_assignment, g.z_assignment)],
            "theta1": _estimator_table(g.theta1), "theta2": _estimator_table(g.theta2),
        }
        try:
            gap, mid = midpoint_comparison(pi, pi_dag, cset)
            results["midpoint_comparison"] = {"sup_gap": gap, "midpoint_risk": mid}
        except NotOrthogonal:
            results["midpoint_comparison"] = None
        statuses.append("converged" if rep.lower_ok and rep.upper_ok and rep.reproduced else "failed")
        return results, curves, statuses

    items = spec.candidate_items()
    if kind == "compare_experiments":
        cmp = compare_experiments(spec.data_maps[0], spec.data_maps[1], items, spec.qoi, spec.loss, spec.game)
        return {"verdict": cmp.verdict, "first_value": cmp.first_value, "second_value": cmp.second_value}, curves, statuses

    cset = CandidateSet.build(items, spec.qoi, spec.data_maps[0])
    base = {"n_candidates": len(cset), "phi": cset.phi.tolist(), "alphabet_size": len(cset.alphabet)}

    if kind == "minimax_estimate":
        sol = minimax_estimator(cset, spec.loss, spec.game)
        statuses.append(sol.status)
        curves["trajectory"] = _curve(["iteration", "value"], [(i, float(v) if np.ndim(v) == 0 else float(v[0]))
                                                               for i, v in enumerate(sol.trajectory)])
        base.update({
            "minimax_value": sol.minimax_value, "maximin_value": sol.maximin_value,
            "duality_gap": sol.duality_gap, "iterations": sol.iterations, "status": sol.status,
            "least_favorable_prior": list(sol.least_favorable_prior.weights),
            "estimator": _estimator_table(sol.estimator),
        })
        return base, curves, statuses

    if kind == "confidence_interval":
        res = optimal_confidence_interval(spec.epsilon, cset, spec.game)
        statuses.append(res.status)
        curves["gamma_curve"] = res.curve_csv()
        base.update({
            "epsilon": res.epsilon, "gamma_eps": res.gamma_eps,
            "game_value_at_gamma": res.game_value_at_gamma,
            "deterministic_value": res.deterministic_value, "randomized_value": res.randomized_value,
            "estimator": _estimator_table(res.estimator), "status": res.status,
        })
        if not res.estimator.is_randomized:
            base["intervals"] = [list(res.interval(i)) for i in range(len(cset.alphabet))]
        return base, curves, statuses

    if kind == "mix_estimators":
        thetas = [build_estimator(e, cset.alphabet) for e in spec.estimators]
        mix = mix_estimators(thetas, cset, spec.loss, spec.game)
        base.update({"alpha": list(mix.alpha), "value": mix.value, "vertex_values": list(mix.vertex_values)})
        return base, curves, statuses

    raise ValueError(f"unhandled kind {kind!r}")


def _flatten(prefix: str, obj, rows: list) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, rows)
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, json.dumps(obj)))


def write_report(report: dict, curves: dict, out_dir: Path, fmt: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "json":
        path = out_dir / "report.json"
        path.write_text(json.dumps(report, indent=2) + "\n")
    else:
        rows: list = []
        _flatten("", report, rows)
        path = out_dir / "report.csv"
        path.write_text(_curve(["key", "value"], rows))
    written.append(path)
    for name, text in curves.items():
        p = out_dir / f"{name}.csv"
        p.write_text(text)
        written.append(p)
    return written


def _load(path: str) -> ProblemSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MinimaxUQError(f"cannot read spec: {exc}") from exc
    return validate(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minimaxuq", description="Optimal UQ bounds and minimax estimation games.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", help="schema-check a problem spec")
    v.add_argument("--spec", required=True)
    r = sub.add_parser("run", help="solve a problem spec and write a report")
    r.add_argument("--spec", required=True)
    r.add_argument("--out", default="out")
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--seed", type=int)
    r.add_argument("--threads", type=int)
    r.add_argument("--restarts", type=int)
    r.add_argument("--tol", type=float)
    r.add_argument("--max-iters", type=int, dest="max_iters")
    r.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec = _load(args.spec)
        if args.command == "validate":
            print(f"ok: {spec.kind}")
            return EXIT_OK
        spec = spec.with_overrides(seed=args.seed, threads=args.threads, restarts=args.restarts,
                                   tol=args.tol, max_iters=args.max_iters)
        start = time.perf_counter()
        results, curves, statuses = execute(spec)
        elapsed = time.perf_counter() - start
    except MinimaxUQError as exc:
        print(f"error [{exc.module}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error [input] {exc}", file=sys.stderr)
        return EXIT_ERROR
    certified = all(s == "converged" for s in statuses)
    report = {
        "tool": "minimaxuq", "version": __version__, "seed": spec.solver.seed,
        "spec": spec.raw, "results": results, "certified": certified, "wall_time_s": round(elapsed, 3),
    }
    paths = write_report(report, curves, Path(args.out), args.format)
    for p in paths:
        print(p)
    return EXIT_OK if certified else EXIT_UNCERTIFIED


if __name__ == "__main__":
    sys.exit(main())
