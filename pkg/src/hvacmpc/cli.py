"""Command-line experiment runner.

Subcommands: identify, run, compare, montecarlo, metrics. Exit codes:
0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .harness.config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .optimizer import SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hvacmpc",
                                description="Building MPC experiment harness")
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="YAML experiment configuration")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--mode", choices=("heating", "cooling"))
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("identify", help="run the identification campaign")
    common(sp)

    sp = sub.add_parser("run", help="closed-loop run with one controller")
    common(sp)
    sp.add_argument("--controller", choices=("mpc", "thermostat"))

    sp = sub.add_parser("compare", help="MPC vs thermostat on the same scenario")
    common(sp)

    sp = sub.add_parser("montecarlo", help="forecast-uncertainty study")
    common(sp)
    sp.add_argument("--realizations", type=int)
    sp.add_argument("--uncertainty",
                    help="comma-separated subset of temp,irr,gains")

    sp = sub.add_parser("metrics", help="recompute metrics from a dumped run")
    sp.add_argument("--config", required=True)
    sp.add_argument("--trajectory", required=True, help="trajectory.csv path")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--mode", choices=("heating", "cooling"))
    sp.add_argument("--controller", choices=("mpc", "thermostat"))
    sp.add_argument("--out")
    return p


def _load_cfg(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else config_from_dict({})
    doc = cfg.to_dict()
    for name in ("seed", "mode", "controller", "realizations"):
        val = getattr(args, name, None)
        if val is not None:
            doc[name] = val
    if getattr(args, "uncertainty", None):
        doc["uncertainty_sources"] = [s for s in args.uncertainty.split(",") if s]
    return config_from_dict(doc)


def _cmd_identify(args) -> int:
    from .harness.runner import build_scenario, identify
    from .sysid import save_models
    cfg = _load_cfg(args)
    scenario = build_scenario(cfg)
    models = identify(scenario)
    print(json.dumps({"zone_fit_1step": models.zone.diagnostics.get("fit_1step"),
                      "loop_fit_1step": models.loop.diagnostics.get("fit_1step"),
                      "pv_residual_rms": models.pv.diagnostics.get("residual_rms")},
                     indent=1))
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
        save_models(os.path.join(args.out, "models.json"),
                    models.zone, models.loop, models.pv)
    return EXIT_OK


def _cmd_run(args) -> int:
    from .harness.runner import run_experiment
    cfg = _load_cfg(args)
    report = run_experiment(cfg, out_dir=args.out)
    print(json.dumps(report.to_dict(), indent=1))
    return EXIT_OK


def _cmd_compare(args) -> int:
    from .harness.runner import compare
    cfg = _load_cfg(args)
    out = compare(cfg, out_dir=args.out)
    doc = {kind: out[kind].to_dict() for kind in ("mpc", "thermostat")}
    doc["cost_reduction_pct"] = out["cost_reduction_pct"]
    print(json.dumps(doc, indent=1))
    return EXIT_OK


def _cmd_montecarlo(args) -> int:
    from .harness.runner import monte_carlo
    cfg = _load_cfg(args)
    summary = monte_carlo(cfg, out_dir=args.out)
    print(json.dumps(summary, indent=1))
    return EXIT_OK


def _cmd_metrics(args) -> int:
    from .harness.runner import build_scenario
    from .harness.metrics import compute_report
    cfg = _load_cfg(args)
    scenario = build_scenario(cfg)
    rows = np.genfromtxt(args.trajectory, delimiter=",", names=True)
    m = cfg.n_zones
    t_zone = np.column_stack([rows[f"t_zone_{i}"] for i in range(m)])
    report = compute_report(t_zone, np.atleast_1d(rows["w"]), scenario.price,
                            scenario.schedule, scenario.dr,
                            solve_times=np.atleast_1d(rows["solve_time"]))
    print(json.dumps(report.to_dict(), indent=1))
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
        report.to_json(os.path.join(args.out, "metrics.json"))
    return EXIT_OK


_COMMANDS = {"identify": _cmd_identify, "run": _cmd_run, "compare": _cmd_compare,
             "montecarlo": _cmd_montecarlo, "metrics": _cmd_metrics}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
