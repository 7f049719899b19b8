"""``slosh-clf`` command line: simulate, analyze, sweep.

Exit codes: 0 ok, 1 certificate failure, 2 config error, 3 gain refusal,
4 blow-up.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analysis as an
from .config import ConfigError, ScenarioConfig, build_scenario, load_config, resolve_key
from .harness import TRACE_COLUMNS, SimTrace, certify, run_simulation
from .model import BlowUpError, GainConditionError, ParameterError

EXIT_OK = 0
EXIT_CERT_FAIL = 1
EXIT_CONFIG = 2
EXIT_GAIN = 3
EXIT_BLOWUP = 4

FLOAT_FMT = "%.17g"
ANALYZE_COLUMNS = ("r", "theta", "Q1", "Q2", "Lambda", "G2", "beta", "lambda_V", "lambda_norm", "gain_margin")


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def write_trace_csv(trace: SimTrace, path: str) -> None:
    cols = trace.columns()
    data = np.column_stack([cols[c] for c in TRACE_COLUMNS])
    np.savetxt(path, data, fmt=FLOAT_FMT, delimiter=",", header=",".join(TRACE_COLUMNS), comments="")


def write_profiles_csv(trace: SimTrace, path: str) -> None:
    """Long format on cell centres; v is the average of the two adjacent faces."""
    x = trace.grid.centers
    with open(path, "w") as fh:
        fh.write("t,x,h,v\n")
        for t, (h, v) in zip(trace.times, trace.profiles):
            vc = 0.5 * (v[:-1] + v[1:])
            for xi, hi, vi in zip(x, h, vc):
                fh.write(f"{_fmt(t)},{_fmt(xi)},{_fmt(hi)},{_fmt(vi)}\n")


@dataclass(frozen=True)
class RunOutcome:
    code: int
    message: str
    lambda_emp: float = float("nan")
    lambda_V: float = float("nan")
    worst_margin: float = float("nan")


def run_scenario(cfg: ScenarioConfig, out_dir: str, profiles: bool = False) -> RunOutcome:
    """Build, integrate, certify and write outputs for one scenario."""
    try:
        ic, gains = build_scenario(cfg)
        trace = run_simulation(ic, cfg.params, gains, cfg.grid, cfg.stepping, record_profiles=profiles)
    except GainConditionError as exc:
        return RunOutcome(EXIT_GAIN, f"refused: {exc}")
    except BlowUpError as exc:
        return RunOutcome(EXIT_BLOWUP, f"blow-up: {exc}")
    except (ParameterError, ValueError) as exc:
        return RunOutcome(EXIT_CONFIG, f"invalid scenario: {exc}")
    report = certify(trace)
    os.makedirs(out_dir, exist_ok=True)
    write_trace_csv(trace, os.path.join(out_dir, "trace.csv"))
    with open(os.path.join(out_dir, "certificates.txt"), "w") as fh:
        fh.write(f"k = {_fmt(gains.k)}\nr = {_fmt(trace.r)}\nR = {_fmt(trace.R)}\n")
        fh.write(report.to_text())
    if profiles:
        write_profiles_csv(trace, os.path.join(out_dir, "profiles.csv"))
    lam = report.decay.lambda_emp
    return RunOutcome(
        EXIT_OK if report.passed else EXIT_CERT_FAIL,
        report.to_text(),
        float("nan") if lam is None else lam,
        report.lambda_V,
        report.worst_margin,
    )


def cmd_simulate(config_path: str, profiles: bool = False, out: str | None = None) -> int:
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    res = run_scenario(cfg, out or cfg.out_dir, profiles or cfg.profiles)
    print(res.message, end="" if res.message.endswith("\n") else "\n", file=sys.stdout if res.code <= 1 else sys.stderr)
    return res.code


def analysis_rows(cfg: ScenarioConfig, n_points: int = 10) -> list[dict[str, float]]:
    p, gains = cfg.params, cfg.gains
    R = an.spill_radius_R(p, gains.delta)
    rows = []
    for i in range(n_points):
        r = R * i / n_points
        q1, q2 = an.level_bounds(r, p, gains.delta)
        chk = an.check_gain_condition(p, gains, r)
        row = {
            "r": r,
            "theta": chk.theta,
            "Q1": q1,
            "Q2": q2,
            "Lambda": an.Lambda(r, p, gains),
            "G2": an.g2(r, p, gains),
            "gain_margin": chk.margin,
        }
        if chk.passed:
            b = an.beta(r, p, gains)
            row["beta"] = b
            row["lambda_V"] = b / row["Lambda"]
            row["lambda_norm"] = 0.5 * row["lambda_V"]
        else:
            row["beta"] = row["lambda_V"] = row["lambda_norm"] = float("nan")
        rows.append(row)
    return rows


def cmd_analyze(config_path: str, csv: bool = False) -> int:
    try:
        cfg = load_config(config_path)
        sr = an.spill_radius(cfg.params, cfg.gains.delta)
        rows = analysis_rows(cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if csv:
        print(",".join(ANALYZE_COLUMNS))
        for row in rows:
            print(",".join(_fmt(row[c]) for c in ANALYZE_COLUMNS))
        return EXIT_OK
    p, d = cfg.params, cfg.gains.delta
    branch = sr.zeta1_branch if sr.active == "zeta1" else sr.zeta2_branch
    print(f"R = {_fmt(sr.R)}  (active: {sr.active} = min(zeta1, zeta2), via {branch})")
    print(f"zeta1 = {_fmt(sr.zeta1)}  Gamma = {', '.join(_fmt(x) for x in sr.gammas)}")
    print(f"zeta2 = {_fmt(sr.zeta2)}  Delta = {', '.join(_fmt(x) for x in sr.deltas)}")
    print(f"c = {_fmt(an.clf_constant_c(p, d))}")
    print(f"positivity threshold = {_fmt(an.positivity_threshold(p, d))}")
    print(f"k = {_fmt(cfg.gains.k)}{'  (auto, provisional)' if cfg.k_auto else ''}")
    head = ("r", "theta", "beta", "Lambda", "lambda_V", "lambda_norm", "gain_margin")
    print(" ".join(f"{h:>13}" for h in head))
    for row in rows:
        print(" ".join(f"{row[h]:>13.6e}" for h in head))
    return EXIT_OK


def _sweep_one(args):
    cfg, out_dir = args
    return run_scenario(cfg, out_dir, cfg.profiles)


def cmd_sweep(config_path: str, param: str, values: str, jobs: int = 1, out: str | None = None) -> int:
    grid = [v.strip() for v in values.split(",") if v.strip()]
    if not grid:
        print("config error: empty sweep grid", file=sys.stderr)
        return EXIT_CONFIG
    try:
        base = load_config(config_path)
        resolve_key(param)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    root = out or base.out_dir
    tag = param.replace(".", "_")
    # a bad value fails its own row only
    results: list[RunOutcome | None] = [None] * len(grid)
    tasks, slots = [], []
    for i, v in enumerate(grid):
        try:
            cfg = base.with_value(param, v)
        except ConfigError as exc:
            results[i] = RunOutcome(EXIT_CONFIG, f"config error: {exc}")
            continue
        tasks.append((cfg, os.path.join(root, f"{tag}_{i:03d}")))
        slots.append(i)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_sweep_one, tasks))
    else:
        done = [_sweep_one(t) for t in tasks]
    for i, res in zip(slots, done):
        results[i] = res
    os.makedirs(root, exist_ok=True)
    with open(os.path.join(root, "sweep_summary.csv"), "w") as fh:
        fh.write(f"{param},exit_status,lambda_emp,lambda_V,worst_margin\n")
        for v, res in zip(grid, results):
            fh.write(f"{v},{res.code},{_fmt(res.lambda_emp)},{_fmt(res.lambda_V)},{_fmt(res.worst_margin)}\n")
    for v, res in zip(grid, results):
        print(f"{param}={v}: exit {res.code}")
        if res.code == EXIT_CONFIG:
            print(f"  {res.message}", file=sys.stderr)
    return EXIT_OK if all(r.code == EXIT_OK for r in results) else EXIT_CERT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slosh-clf", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="run one scenario and certify it")
    s.add_argument("config")
    s.add_argument("--profiles", action="store_true", help="also write profiles.csv")
    s.add_argument("--out", default=None, help="output directory (default: [output] dir)")
    a = sub.add_parser("analyze", help="print certificate constants without simulating")
    a.add_argument("config")
    a.add_argument("--csv", action="store_true")
    w = sub.add_parser("sweep", help="run one scenario per parameter value")
    w.add_argument("config")
    w.add_argument("--param", required=True, help="key or section.key")
    w.add_argument("--values", required=True, help="comma-separated values")
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--out", default=None)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return cmd_simulate(args.config, args.profiles, args.out)
    if args.command == "analyze":
        return cmd_analyze(args.config, args.csv)
    return cmd_sweep(args.config, args.param, args.values, args.jobs, args.out)


if __name__ == "__main__":
    sys.exit(main())
