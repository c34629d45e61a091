"""Command-line front end.

Subcommands mirror the library surface: model fitting from CSV
measurements, single-scenario solves, multi-axis sweeps, the decomposition
solver's convergence trace, and the weight-simplex trade-off sweep.  All
results are printed as single-line JSON records; failures print a JSON
error line to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys

from .admm import AdmmOptions
from .errors import MecoffError
from .fitting import (estimate_rho, fit_accuracy, fit_complexity,
                      load_frame_value_csv)
from .models import evaluate_allocation
from .scenario import (SCHEMES, SWEEP_AXES, ScenarioConfig, convergence_trace,
                       generate_scenario, local_edge_breakdown, run_scheme,
                       run_sweep, tradeoff_sweep)


def _load_config(args) -> ScenarioConfig:
    cfg = (ScenarioConfig.from_json(args.config) if args.config
           else ScenarioConfig())
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def _emit(record: dict) -> None:
    print(json.dumps(record))


def _cmd_fit_complexity(args) -> int:
    fit = fit_complexity(load_frame_value_csv(args.csv))
    _emit({"m_c0": fit.model.m_c0, "m_c1": fit.model.m_c1, "rmse": fit.rmse})
    return 0


def _cmd_fit_accuracy(args) -> int:
    fit = fit_accuracy(load_frame_value_csv(args.csv))
    _emit({"m_a0": fit.model.m_a0, "m_a1": fit.model.m_a1,
           "m_a2": fit.model.m_a2, "rmse": fit.rmse})
    return 0


def _cmd_solve(args) -> int:
    cfg = _load_config(args)
    scenario = generate_scenario(cfg)
    alloc = run_scheme(scenario, args.scheme, seed=cfg.seed)
    metrics = evaluate_allocation(scenario.params, scenario.cmodel,
                                  scenario.amodel, scenario.devices, alloc)
    _emit({
        "scheme": args.scheme,
        "n_devices": cfg.n_devices,
        "seed": cfg.seed,
        "total_cost": metrics.total_cost,
        "avg_cost": metrics.total_cost / cfg.n_devices,
        "avg_delay_s": metrics.avg_delay_s,
        "avg_energy_j": metrics.avg_energy_j,
        "avg_accuracy": metrics.avg_accuracy,
        "offload_rate": metrics.offload_rate,
        "offload": [int(v) for v in alloc.offload],
        "frames": [int(v) for v in alloc.frames],
    })
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    values = [v for v in args.values.split(",") if v]
    if args.vary in ("n_devices",):
        values = [int(v) for v in values]
    elif args.vary in ("bandwidth", "edge_compute"):
        values = [float(v) for v in values]
    schemes = [s for s in args.schemes.split(",") if s]
    rows, path = run_sweep(cfg, args.vary, values, schemes,
                           reps=args.reps, out_dir=args.out)
    failed = sum(1 for r in rows if r["error"])
    _emit({"rows": len(rows), "failed": failed, "csv": str(path)})
    return 0


def _cmd_convergence(args) -> int:
    cfg = _load_config(args)
    opts = AdmmOptions(s=args.s, delta=args.delta, max_iters=args.max_iters,
                       init=args.init)
    trace, path = convergence_trace(cfg, opts, out_dir=args.out)
    _emit({"iterations": len(trace), "converged": trace.converged,
           "final_objective": trace.objective[-1] if len(trace) else None,
           "csv": str(path)})
    return 0


def _cmd_tradeoff(args) -> int:
    cfg = _load_config(args)
    rows, path = tradeoff_sweep(cfg, args.weights_grid, out_dir=args.out)
    _emit({"rows": len(rows), "csv": str(path)})
    return 0


def _cmd_breakdown(args) -> int:
    cfg = _load_config(args)
    rows, path = local_edge_breakdown(cfg, scheme=args.scheme,
                                      reps=args.reps, out_dir=args.out)
    _emit({"rows": len(rows), "csv": str(path)})
    return 0


def _cmd_estimate_rho(args) -> int:
    samples = load_frame_value_csv(args.csv)
    # Here `value` is the measured latency in seconds and frames carries
    # the MAC count of the profiled run.
    macs = [s[0] for s in samples]
    lats = [s[1] for s in samples]
    _emit({"rho": estimate_rho(lats, macs, args.clock_hz)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mecoff",
        description="Joint DNN-inference offloading and resource allocation "
                    "for a multi-user edge cell")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-complexity",
                       help="fit the affine MACs-vs-frames model from a CSV")
    p.add_argument("csv", help="CSV file with header frames,value")
    p.set_defaults(func=_cmd_fit_complexity)

    p = sub.add_parser("fit-accuracy",
                       help="fit the saturating accuracy model from a CSV")
    p.add_argument("csv", help="CSV file with header frames,value")
    p.set_defaults(func=_cmd_fit_accuracy)

    p = sub.add_parser("estimate-rho",
                       help="estimate cycles per MAC from timed runs")
    p.add_argument("csv", help="CSV with header frames,value "
                               "(MACs, latency seconds)")
    p.add_argument("--clock-hz", type=float, required=True,
                   help="CPU clock of the profiled device")
    p.set_defaults(func=_cmd_estimate_rho)

    p = sub.add_parser("solve", help="solve one scenario with one scheme")
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--config", help="scenario JSON (defaults if omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="sweep one axis over schemes and seeds")
    p.add_argument("--vary", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True,
                   help="comma-separated axis values "
                        "(weights as b1:b2:b3 triples)")
    p.add_argument("--schemes", required=True,
                   help=f"comma-separated subset of {','.join(SCHEMES)}")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="scenario JSON (defaults if omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("convergence",
                       help="trace the decomposition solver on one scenario")
    p.add_argument("--config", help="scenario JSON (defaults if omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--s", type=float, default=0.5, help="penalty step")
    p.add_argument("--delta", type=float, default=1e-4,
                   help="stopping tolerance on consecutive costs")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--init", choices=("uniform", "zero"), default="uniform")
    p.set_defaults(func=_cmd_convergence)

    p = sub.add_parser("tradeoff",
                       help="sweep the weight simplex and record the "
                            "delay/energy/accuracy surface")
    p.add_argument("--weights-grid", type=int, required=True,
                   help="simplex grid divisions (>= 3)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="scenario JSON (defaults if omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=_cmd_tradeoff)

    p = sub.add_parser("breakdown",
                       help="per-set (local vs edge) metric averages")
    p.add_argument("--scheme", default="channel_aware", choices=SCHEMES)
    p.add_argument("--reps", type=int, default=1,
                   help="number of seeded replications to pool")
    p.add_argument("--config", help="scenario JSON (defaults if omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="output directory (optional)")
    p.set_defaults(func=_cmd_breakdown)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MecoffError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
