"""Batch command-line entry point.

Subcommands: generate (instance CSVs), solve (exact engine), heuristic,
export-lp, sweep, validate.  All randomness flows from --seed; flags
override values from an optional --config JSON file.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import eepiv as eepiv_mod
from . import experiments, milp
from .config import load_config
from .power import ModelParams
from .topology import TopologyConfig, build_instance, write_csv


def _parse_seeds(text: str) -> tuple[int, ...]:
    """'1,2,5' or '1..10' (inclusive range)."""
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(s) for s in text.split(","))


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--scale", choices=["paper", "reduced"], default="paper")
    p.add_argument("--scenario", type=int, choices=[1, 2, 3], default=1)
    p.add_argument("--reduction", type=float, default=0.5,
                   help="traffic reduction fraction in [0, 1)")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--no-capacity", action="store_true",
                   help="drop the per-cloudlet workload cap")
    p.add_argument("--out", default=None, help="output directory "
                   "(default $PONPLACE_OUT or current directory)")


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("PONPLACE_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _instance_and_params(args):
    if args.config:
        config, params = load_config(args.config)
        config = type(config)(**{**config.__dict__, "rng_seed": args.seed})
        params = ModelParams.for_scenario(
            args.scenario, args.reduction, vm_types=config.vm_types,
            capacity_enforced=not args.no_capacity)
    else:
        config = experiments.topology_for_scale(args.scale, args.seed)
        params = ModelParams.for_scenario(
            args.scenario, args.reduction, vm_types=config.vm_types,
            capacity_enforced=not args.no_capacity)
    return build_instance(config), params


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ponplace",
        description="Energy-aware VM/cloudlet placement over an IoT-PON network")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write instance nodes/edges CSVs")
    _add_engine_flags(p)

    p = sub.add_parser("solve", help="run the exact engine")
    _add_engine_flags(p)

    p = sub.add_parser("heuristic", help="run the greedy engine")
    _add_engine_flags(p)
    p.add_argument("--literal-total", action="store_true",
                   help="report the reduced audit total (no OLT processing, "
                        "no traffic scaling)")

    p = sub.add_parser("export-lp", help="write the model as an LP file")
    _add_engine_flags(p)
    p.add_argument("--mps", action="store_true", help="also write MPS")

    p = sub.add_parser("sweep", help="scenario/reduction/seed sweep")
    _add_engine_flags(p)
    p.add_argument("--scenarios", default="1,2,3")
    p.add_argument("--reductions", default="0.1,0.3,0.5,0.7,0.9")
    p.add_argument("--engine", action="append", dest="engines",
                   choices=["exact", "eepiv", "lp-export"])
    p.add_argument("--seeds", default=None, help="'1,2,5' or '1..10'")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("validate", help="check an imported solution file")
    _add_engine_flags(p)
    p.add_argument("--solution", required=True, help="two-column "
                   "'variable value' file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except milp.ResourceBudgetError as exc:
        print(f"error: resource-budget: {exc}", file=sys.stderr)
        return 1
    except (milp.InfeasibleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    out = _out_dir(args)
    if args.command == "generate":
        instance, _ = _instance_and_params(args)
        write_csv(instance, out)
        print(f"wrote {out / 'nodes.csv'} and {out / 'edges.csv'}")
        return 0

    if args.command == "solve":
        instance, params = _instance_and_params(args)
        solution, flows, report = milp.solve_exact(instance, params)
        milp.write_solution_values(out / "solution.txt", solution, flows)
        print(f"optimal total: {report.total_w:.6f} W")
        for (c, v) in sorted(solution.placed):
            print(f"  type {v} at node {c} ({instance.layer(c).value}, "
                  f"network {instance.network_of(c)})")
        return 0

    if args.command == "heuristic":
        instance, params = _instance_and_params(args)
        res = eepiv_mod.run_eepiv(instance, params,
                                  literal_total=args.literal_total)
        milp.write_solution_values(out / "solution.txt", res.solution,
                                   res.flows)
        print(f"heuristic total: {res.report.total_w:.6f} W "
              f"(served {res.served_count} objects)")
        for (c, v) in sorted(res.solution.placed):
            print(f"  type {v} at node {c} ({instance.layer(c).value}, "
                  f"network {instance.network_of(c)})")
        return 0

    if args.command == "export-lp":
        instance, params = _instance_and_params(args)
        model = milp.build_model(instance, params)
        lp = milp.emit_lp(model, out / "model.lp")
        print(f"wrote {lp}")
        if args.mps:
            mps = milp.emit_mps(model, out / "model.mps")
            print(f"wrote {mps}")
        return 0

    if args.command == "sweep":
        spec = experiments.SweepSpec(
            scenarios=tuple(int(s) for s in args.scenarios.split(",")),
            reductions=tuple(float(r) for r in args.reductions.split(",")),
            engines=tuple(args.engines or ["eepiv"]),
            seeds=_parse_seeds(args.seeds) if args.seeds else (args.seed,),
            scale=args.scale,
            capacity_enforced=not args.no_capacity)
        result = experiments.run_sweep(spec, out_dir=out, jobs=args.jobs)
        experiments.write_sweep_csv(result, out / "sweep.csv")
        experiments.write_placements_csv(result, out / "placements.csv")
        try:
            rows = experiments.savings_summary(result)
            experiments.write_savings_csv(rows, out / "savings.csv")
        except experiments.SweepError as exc:
            print(f"savings skipped: {exc}")
        print(f"wrote {out / 'sweep.csv'}, {out / 'placements.csv'}")
        return 0

    if args.command == "validate":
        instance, params = _instance_and_params(args)
        values = milp.load_solution_values(args.solution)
        solution, flows = milp.solution_from_values(values, instance, params)
        report = milp.validate_solution(solution, flows, instance, params)
        report.write_csv(out / "validation.csv")
        print(f"objective: {report.objective_w:.6f} W; "
              f"violations: {len(report.violations)}")
        for v in report.violations[:20]:
            print(f"  {v.family} {v.row} residual={v.residual!r}")
        return 0 if report.ok else 1

    raise ValueError(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
