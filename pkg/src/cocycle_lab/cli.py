"""Command line front end: ``cocycle-lab run`` and ``cocycle-lab describe``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from enum import Enum
from pathlib import Path

import numpy as np

from . import analysis, config
from .cocycle import closeness_constants, distortions
from .config import ConfigError, JobConfig, selected
from .invariant import FamilyError, build_family, holder_profile, isometry_defect
from .sft import Point

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, Point):
        return obj.to_dict()
    return obj


def _random_point(cfg: JobConfig, radius: int) -> Point:
    rng = np.random.default_rng(cfg.seed)
    M = cfg.matrix
    word = [int(rng.integers(M.k))]
    for _ in range(2 * radius):
        succ = M.successors(word[-1])
        word.append(succ[int(rng.integers(len(succ)))])
    return Point.from_window(M, word, -radius)


def _stage(passed, **details) -> dict:
    return {"passed": passed, **details}


def run_job(cfg: JobConfig) -> tuple:
    """Run the selected suites; returns ``(report, traces_csv, all_passed)``."""
    g, metric, tol = cfg.generator, cfg.metric, cfg.tolerances
    stages: dict = {}
    traces = io.StringIO()
    tw = csv.writer(traces, lineterminator="\n")
    tw.writerow(["series", "point", "index", "lo", "hi"])

    pd = analysis.collect_periodic_data(g, tol["k_max"])
    for k, cp in enumerate(pd.per_k_C, 1):
        tw.writerow(["C_per_k", "", k, repr(cp), repr(cp)])
    q = tol["q_samples"]
    x = _random_point(cfg, q)
    P, Pi = g.orbit_products(x, q)
    for n, val in zip(range(-q, q + 1), distortions(P, Pi)):
        tw.writerow(["Q", "sample", n, repr(float(val)), repr(float(val))])

    budget = analysis.Budget(k_max=tol["k_max"], horizon=tol["horizon"],
                             n_trials=tol["n_trials"], eps=tuple(tol["eps"]),
                             n_test=tol["n_test"], min_m=tol["min_m"], seed=cfg.seed,
                             nets=selected(cfg, "nets"))
    vr = analysis.verdict(g, budget, metric, pd=pd)
    ev = vr.evidence
    reached = {"periodic": True, "bunching": "bunching" in ev,
               "shadowing": "shadowing_distortion" in ev, "nets": "nets" in ev}

    if selected(cfg, "periodic"):
        fit = analysis.periodic_growth(pd)
        stages["periodic"] = _stage(not fit.unbounded, **ev["periodic"], sample_point=x)
    if selected(cfg, "bunching"):
        b = ev.get("bunching")
        stages["bunching"] = (_stage(bool(b.get("certified")), **b) if b is not None
                              else _stage(False, skipped="periodic data looks unbounded"))
    if selected(cfg, "shadowing"):
        if reached["shadowing"]:
            sd, sn = ev["shadowing_distortion"], ev["shadowing_norms"]
            stages["shadowing"] = _stage(sd["ok"] and sn["ok"], distortion=sd, norms=sn)
        else:
            stages["shadowing"] = _stage(False, skipped=f"stopped at stage {vr.stage}")
    if selected(cfg, "nets"):
        nets = ev.get("nets")
        if isinstance(nets, list):
            stages["nets"] = _stage(all(n["ok"] for n in nets), nets=nets)
        elif isinstance(nets, dict):
            stages["nets"] = _stage(False, **nets)
        else:
            stages["nets"] = _stage(False, skipped=f"stopped at stage {vr.stage}")

    K_fam = None
    if selected(cfg, "invariant_norms"):
        fam = build_family(g, tol["L"], tol["tol"], tol["m_max"], tol["max_aux"])
        K_fam = fam.K
        defects = [isometry_defect(g, fam, p) for p in fam.base_points]
        max_def = max(d.hi for d in defects)
        if not fam.converged:
            hp = {"ok": False, "reason": "family did not converge"}
        else:
            try:
                hp = holder_profile(g, fam, metric).to_dict()
            except FamilyError as exc:
                hp = {"ok": False, "reason": str(exc)}
        passed = fam.converged and max_def <= 3 * tol["tol"] and hp["ok"]
        stages["invariant_norms"] = _stage(
            bool(passed), converged=fam.converged, diverged=fam.diverged,
            convergence_m=fam.convergence_m, K=fam.K, residual=fam.residual.to_dict(),
            max_isometry_defect=max_def, holder=hp, points=len(fam.points))
        for row in csv.reader(io.StringIO(fam.traces_csv())):
            if row[0] != "point":
                tw.writerow(["residual", *row])

    b = ev.get("bunching", {})
    nets = ev.get("nets")
    M_net = max((n["M"] for n in nets), default=None) if isinstance(nets, list) else None
    constants = {
        "c": ev.get("closeness_c", closeness_constants(g, metric).c),
        "L": b.get("L"), "theta": b.get("theta"),
        "C_per": pd.C_per, "C_prime_per": pd.C_prime_per,
        "M": M_net, "K": K_fam,
    }
    report = {
        "config": cfg.to_dict(),
        "generator": {"name": g.name, "dim": g.dim, "depth": g.depth, "beta": g.beta,
                      "words": int(len(g.words))},
        "constants": constants,
        "stages": stages,
        "verdict": vr.verdict.value,
        "verdict_stage": vr.stage,
        "witness": ev["periodic"]["witness"],
    }
    all_passed = all(s["passed"] for s in stages.values())
    report["all_passed"] = all_passed
    return _clean(report), traces.getvalue(), all_passed


def describe(cfg: JobConfig) -> str:
    g, M = cfg.generator, cfg.matrix
    suites = "all" if "all" in cfg.suites else ", ".join(cfg.suites)
    lines = [
        f"{M.k} symbols, depth {g.depth}, β={g.beta:g}, ν={cfg.metric.nu:g}, suites: {suites}",
        f"generator: {g.name}, dim {g.dim}, {len(g.words)} admissible {2 * g.depth + 1}-words",
        "trace(M^k), k = 1..6: " + ", ".join(str(M.trace_power(k)) for k in range(1, 7)),
        f"seed {cfg.seed}, mode {cfg.mode}",
    ]
    return "\n".join(lines)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cocycle-lab",
                                description="Checks for matrix cocycles over subshifts of finite type")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run check suites and write report.json and traces.csv")
    r.add_argument("config")
    r.add_argument("--suite", action="append", choices=["all", *config.SUITES],
                   help="suite to run; repeatable (overrides the config)")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.add_argument("--seed", type=int, help="random seed (overrides the config)")
    d = sub.add_parser("describe", help="summarise a config without computing")
    d.add_argument("config")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = config.load(args.config)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "describe":
        print(describe(cfg))
        return EXIT_OK
    if args.suite:
        cfg.suites = ("all",) if "all" in args.suite else tuple(dict.fromkeys(args.suite))
    if args.seed is not None:
        if args.seed < 0:
            print("config error: seed: must be >= 0", file=sys.stderr)
            return EXIT_CONFIG
        cfg.seed = args.seed
    out = Path(args.out or cfg.out_dir)
    report, traces, passed = run_job(cfg)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    (out / "traces.csv").write_text(traces)
    print(f"verdict: {report['verdict']} (stage {report['verdict_stage']})")
    for name, st in sorted(report["stages"].items()):
        print(f"  {name}: {'pass' if st['passed'] else 'FAIL'}")
    print(f"wrote {out / 'report.json'} and {out / 'traces.csv'}")
    if cfg.mode == "assert" and not passed:
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
