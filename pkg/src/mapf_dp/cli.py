"""Command-line front end: generate / solve / validate / simulate / bench.

Exit codes: 0 ok or solved, 2 no solution, 3 timeout, 4 validation failure,
1 usage or internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path as FilePath

from . import bench as bench_mod
from . import mapio
from .adapted_cbs import solve_adapted_cbs
from .ame import SolveLimits, solve_ame
from .dependency import dependency_stats
from .generate import WarehouseParams, generate_random_instance, \
    generate_warehouse_instance, resample_delays
from .model import validate_plan
from .simulate import POLICIES, monte_carlo

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_SOLUTION = 2
EXIT_TIMEOUT = 3
EXIT_INVALID = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mapfdp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write instance files")
    gen.add_argument("--kind", choices=("random", "warehouse"), default="random")
    gen.add_argument("--width", type=int, default=20)
    gen.add_argument("--height", type=int, default=20)
    gen.add_argument("--blocked", type=float, default=0.10)
    gen.add_argument("--agents", type=int, default=10)
    gen.add_argument("--p-hi", type=float, default=0.5)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--t-hat-sweep", default="",
                     help="comma-separated t_hat_max values; emits one instance "
                          "per value sharing one layout")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=".")

    sol = sub.add_parser("solve", help="plan an instance")
    sol.add_argument("map")
    sol.add_argument("agents")
    sol.add_argument("--solver", choices=bench_mod.SOLVERS, default="ame")
    sol.add_argument("--time-limit", type=float, default=60.0)
    sol.add_argument("--recompute-labels", action="store_true")
    sol.add_argument("--out", default="plan.json")

    val = sub.add_parser("validate", help="check a plan against its instance")
    val.add_argument("map")
    val.add_argument("agents")
    val.add_argument("plan")
    val.add_argument("--emit-deps", action="store_true")

    sim = sub.add_parser("simulate", help="Monte Carlo plan execution")
    sim.add_argument("map")
    sim.add_argument("agents")
    sim.add_argument("plan")
    sim.add_argument("--policy", choices=POLICIES, default="mcp")
    sim.add_argument("--runs", type=int, default=200)
    sim.add_argument("--seed", type=int, default=0)

    ben = sub.add_parser("bench", help="run an experiment suite")
    ben.add_argument("--experiment", choices=("exp1", "exp2", "exp3", "exp4"),
                     default="exp1")
    ben.add_argument("--width", type=int, default=20)
    ben.add_argument("--height", type=int, default=20)
    ben.add_argument("--blocked", type=float, default=0.10)
    ben.add_argument("--agents", type=int, default=10)
    ben.add_argument("--instances", type=int, default=10)
    ben.add_argument("--p-hi", type=float, default=0.5)
    ben.add_argument("--solver", action="append", choices=bench_mod.SOLVERS)
    ben.add_argument("--policy", action="append", choices=POLICIES)
    ben.add_argument("--runs", type=int, default=200)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--time-limit", type=float, default=60.0)
    ben.add_argument("--out", default="bench_out")
    return parser


def cmd_generate(args) -> int:
    out = FilePath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instances = []
    if args.t_hat_sweep:
        sweep = [int(tok) for tok in args.t_hat_sweep.split(",") if tok]
        base = generate_random_instance(args.width, args.height, args.blocked,
                                        args.agents, (0.0, args.p_hi), args.seed)
        for t_max in sweep:
            inst = resample_delays(base, 1.0 - 1.0 / t_max,
                                   args.seed + 7000 + t_max)
            instances.append((f"t{t_max:02d}", inst))
    else:
        for k in range(args.count):
            if args.kind == "random":
                inst = generate_random_instance(
                    args.width, args.height, args.blocked, args.agents,
                    (0.0, args.p_hi), args.seed + k)
            else:
                inst = generate_warehouse_instance(
                    WarehouseParams(), args.agents, (0.0, args.p_hi),
                    args.seed + k)
            instances.append((f"{args.kind}-{k:03d}", inst))
    for name, inst in instances:
        map_path = out / f"{name}.map"
        agents_path = out / f"{name}.agents"
        mapio.write_instance(inst, map_path, agents_path)
        print(f"{name}  checksum={mapio.instance_checksum(inst)}")
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = mapio.read_instance(args.map, args.agents)
    limits = SolveLimits(time_s=args.time_limit)
    if args.solver == "ame":
        result = solve_ame(instance, limits, recompute_labels=args.recompute_labels)
    else:
        result = solve_adapted_cbs(instance, limits)
    print(f"solver={args.solver} status={result.status} "
          f"wall_time={result.wall_time:.3f}s "
          f"high_level_expanded={result.high_level_expanded} "
          f"low_level_expanded={result.low_level_expanded}")
    if not result.solved:
        return EXIT_NO_SOLUTION if result.status == "no-solution" else EXIT_TIMEOUT
    plan = result.plan
    if args.solver == "ame":
        print(f"approx_average_makespan={result.key:.6f}")
    print(f"max_index={plan.max_index}")
    mapio.write_plan(args.out, plan, mapio.instance_checksum(instance),
                     solver=args.solver)
    print(f"plan written to {args.out}")
    return EXIT_OK


def _load_checked(args):
    instance = mapio.read_instance(args.map, args.agents)
    plan, checksum = mapio.read_plan(args.plan)
    if checksum and checksum != mapio.instance_checksum(instance):
        print("plan checksum does not match the instance", file=sys.stderr)
        return instance, plan, False
    return instance, plan, True


def cmd_validate(args) -> int:
    instance, plan, ok = _load_checked(args)
    if not ok:
        return EXIT_INVALID
    report = validate_plan(instance, plan)
    for err in report.path_errors:
        print(f"path error: {err}")
    for c in report.conflicts:
        print(f"conflict: {c.kind.value} agents=({c.agent_i},{c.agent_j}) "
              f"vertex={c.vertex} index={c.index}")
    if report.is_valid:
        print("plan is valid")
        if args.emit_deps:
            for k, v in dependency_stats(plan).items():
                print(f"{k}={v}")
        return EXIT_OK
    return EXIT_INVALID


def cmd_simulate(args) -> int:
    instance, plan, ok = _load_checked(args)
    if not ok:
        return EXIT_INVALID
    if args.policy != "dummy" and not validate_plan(instance, plan).is_valid:
        print("plan is invalid; robust policies require a valid plan",
              file=sys.stderr)
        return EXIT_INVALID
    stats = monte_carlo(instance, plan, args.policy, args.runs, args.seed)
    for k, v in stats.as_dict().items():
        print(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}")
    return EXIT_OK


def cmd_bench(args) -> int:
    config = bench_mod.BenchConfig(
        experiment=args.experiment, width=args.width, height=args.height,
        blocked_fraction=args.blocked, n_instances=args.instances,
        agents=args.agents, p_hi=args.p_hi,
        solvers=tuple(args.solver) if args.solver else ("ame",),
        policies=tuple(args.policy) if args.policy else ("mcp",),
        n_runs=args.runs, seed=args.seed, time_limit=args.time_limit)
    rows, warnings = bench_mod.run_bench(config, log=print)
    out = FilePath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(bench_mod.rows_to_csv(rows))
    table = bench_mod.rows_to_table(rows)
    (out / "report.txt").write_text(table)
    print(table, end="")
    for w in warnings:
        print(f"WARNING: {w}")
    print(f"results written to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "generate": cmd_generate,
        "solve": cmd_solve,
        "validate": cmd_validate,
        "simulate": cmd_simulate,
        "bench": cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
