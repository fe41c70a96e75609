"""Command-line interface.

    twinsim run         one scenario -> trace CSV
    twinsim experiment  multi-run -> switch_errors.csv, uncertainties.csv, traces/
    twinsim calibrate   fit k_num and report the plant oscillation metrics
    twinsim summarize   per-approach statistics of a switch_errors.csv
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, replace
from typing import Optional

from .calibrate import calibrate_k_num, dt_free_run_sigma, measure_oscillation, sigma_split
from .harness import run_experiment, run_scenario, read_switch_errors, summarize, summary_table
from .plant import SolverConfig
from .scenario import FailureSpec, ScenarioConfig, load_scenario, save_scenario


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", help="scenario file (flat key = value)")
    parser.add_argument("--approach", choices=("GT", "PT", "UAPT", "UADT", "MDTS"))
    parser.add_argument("--runs", type=int)
    parser.add_argument("--duration", type=float, help="run length in seconds")
    parser.add_argument("--step", type=float, help="digital-twin solver step (s)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--confidence", type=float, help="controller confidence level")
    parser.add_argument("--reliability-limit", type=float,
                        help="model reliability limit (std, degC)")
    parser.add_argument("--consistency-threshold", type=float,
                        help="inconsistency threshold on the consistency degree")
    parser.add_argument("--fail-at", type=float,
                        help="inject the insulation failure at this time (s)")
    parser.add_argument("--out", default="out", help="output directory")


def _build_config(args: argparse.Namespace) -> ScenarioConfig:
    cfg = load_scenario(args.scenario) if args.scenario else ScenarioConfig()
    if args.approach is not None:
        cfg = replace(cfg, approach=args.approach)
    if args.runs is not None:
        cfg = replace(cfg, runs=args.runs)
    if args.duration is not None:
        cfg = replace(cfg, duration=args.duration)
    if args.step is not None:
        cfg = replace(cfg, solver=replace(cfg.solver, h=args.step))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.confidence is not None:
        cfg = replace(cfg, band=replace(cfg.band, confidence=args.confidence))
    if args.reliability_limit is not None:
        cfg = replace(cfg, fusion=replace(cfg.fusion,
                                          reliability_limit=args.reliability_limit))
    if args.consistency_threshold is not None:
        cfg = replace(cfg, consistency=replace(cfg.consistency,
                                               r=args.consistency_threshold))
    if args.fail_at is not None:
        failure = cfg.failure or FailureSpec()
        cfg = replace(cfg, failure=replace(failure, time=args.fail_at))
    cfg.validate()
    return cfg


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    trace = run_scenario(cfg, run_id=args.run_id)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "trace.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(trace.to_csv_text())
    events = [r for r in trace.rows if r.event != "NONE"]
    print(f"wrote {path} ({len(trace.rows)} rows, {len(events)} events)")
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    paths = run_experiment(cfg, args.out, workers=args.workers)
    for path in paths.values():
        print(f"wrote {path}")
    print(f"wrote {os.path.join(args.out, 'traces')}/ ({cfg.runs} trace files)")
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = load_scenario(args.scenario) if args.scenario else ScenarioConfig()
    metrics = measure_oscillation(cfg)
    print("closed-loop measurand oscillation:")
    print(f"  rise time      {metrics.rise_time:.1f} s")
    print(f"  mean period    {metrics.mean_period:.1f} s over {metrics.n_cycles} cycles")
    print(f"  overshoot      {metrics.overshoot:.3f} degC")
    print(f"  undershoot     {metrics.undershoot:.3f} degC")
    print(f"  |1+h*df/dx|    {metrics.min_linearization:.6f} at h={cfg.solver.h}")
    ok = (100.0 <= metrics.mean_period <= 1000.0 and metrics.overshoot <= 1.5
          and metrics.undershoot <= 1.5)
    print(f"  oscillation criterion: {'PASS' if ok else 'FAIL'}")

    h = args.step if args.step is not None else 0.001
    print(f"calibrating k_num at h={h} for sigma({args.horizon:g} s) = {args.target} ...")
    k_num = calibrate_k_num(cfg.plant, h, args.target, cfg.band,
                            sigma_init=cfg.solver.sigma_init, duration=args.horizon)
    solver = SolverConfig(h=h, k_num=k_num, sigma_init=cfg.solver.sigma_init)
    sigma, _ = dt_free_run_sigma(cfg.plant, solver, cfg.band, duration=args.horizon)
    split = sigma_split(cfg.plant, solver, cfg.band, duration=args.horizon)
    print(f"  k_num = {k_num:.6g}   sigma({args.horizon:g}) = {sigma:.6g}")
    print(f"  split: numeric-only {split['numeric_only']:.6g}, "
          f"parameter-only {split['param_only']:.6g}")
    if args.write_scenario:
        out_cfg = replace(cfg, solver=solver)
        save_scenario(out_cfg, args.write_scenario)
        print(f"wrote {args.write_scenario}")
    return 0 if ok else 1


def _cmd_summarize(args: argparse.Namespace) -> int:
    errors = read_switch_errors(args.input)
    summaries = summarize(errors)
    sys.stdout.write(summary_table(summaries))
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({name: asdict(s) for name, s in summaries.items()}, fh, indent=2)
        print(f"wrote {args.json}")
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="twinsim",
        description="uncertainty-aware digital-twin co-simulation (incubator)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write its trace CSV")
    _add_override_flags(p_run)
    p_run.add_argument("--run-id", type=int, default=0)
    p_run.set_defaults(func=_cmd_run)

    p_exp = sub.add_parser("experiment", help="run a multi-run experiment")
    _add_override_flags(p_exp)
    p_exp.add_argument("--workers", type=int, default=1,
                       help="parallel worker processes (results are identical)")
    p_exp.set_defaults(func=_cmd_experiment)

    p_cal = sub.add_parser("calibrate",
                           help="fit k_num and check the plant oscillation")
    p_cal.add_argument("--scenario", help="scenario file with the plant to calibrate")
    p_cal.add_argument("--step", type=float, help="solver step to calibrate (default 1 ms)")
    p_cal.add_argument("--target", type=float, default=2.52,
                       help="target box std at the horizon (default 2.52)")
    p_cal.add_argument("--horizon", type=float, default=2500.0)
    p_cal.add_argument("--write-scenario", help="write the calibrated scenario here")
    p_cal.set_defaults(func=_cmd_calibrate)

    p_sum = sub.add_parser("summarize", help="summarize a switch_errors.csv")
    p_sum.add_argument("input", help="switch_errors.csv path")
    p_sum.add_argument("--json", help="also write the statistics as JSON")
    p_sum.set_defaults(func=_cmd_summarize)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
