"""Experiment harness: desk-scale analogues of the solver/policy studies.

exp1  random + warehouse instances, one row per instance and solver
exp2  fixed random layout, sweep of expected per-move durations
exp3  agent-count sweep with success rates
exp4  policy comparison (mcp / fsp / dummy) on random instances

CSV output is byte-deterministic for a fixed config and seed; wall-clock
runtimes therefore go to the text report only.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from .adapted_cbs import solve_adapted_cbs
from .ame import SolveLimits, SolveResult, solve_ame
from .dependency import approximate_average_makespan, compute_labels
from .generate import WarehouseParams, generate_random_instance, \
    generate_warehouse_instance, resample_delays
from .model import Instance, Plan, validate_plan
from .simulate import monte_carlo

CSV_COLUMNS = [
    "experiment", "instance", "solver", "policy", "agents", "t_hat_max",
    "status", "approx_makespan", "mean_makespan", "ci95", "messages",
    "mean_collisions", "timeouts",
]

SOLVERS = ("ame", "adapted-cbs")


@dataclass
class BenchConfig:
    experiment: str = "exp1"
    width: int = 20
    height: int = 20
    blocked_fraction: float = 0.10
    n_instances: int = 10
    agents: int = 10
    agent_counts: tuple[int, ...] = (5, 10, 15, 20)
    instances_per_count: int = 5
    p_hi: float = 0.5
    t_hat_sweep: tuple[int, ...] = (2, 4, 8)
    solvers: tuple[str, ...] = ("ame",)
    policies: tuple[str, ...] = ("mcp",)
    n_runs: int = 200
    seed: int = 0
    time_limit: float = 60.0
    warehouse: WarehouseParams = field(default_factory=WarehouseParams)

    def __post_init__(self):
        if not self.solvers:
            raise ValueError("empty solver set")
        if not self.policies:
            raise ValueError("empty policy set")
        bad = [s for s in self.solvers if s not in SOLVERS]
        if bad:
            raise ValueError(f"unknown solvers: {bad}")
        for v in (self.n_instances, self.agents, self.n_runs):
            if v <= 0:
                raise ValueError("counts must be positive")


def solve_with(solver: str, instance: Instance, limits: SolveLimits,
               recompute_labels: bool = False) -> SolveResult:
    if solver == "ame":
        return solve_ame(instance, limits, recompute_labels=recompute_labels)
    if solver == "adapted-cbs":
        return solve_adapted_cbs(instance, limits)
    raise ValueError(f"unknown solver {solver!r}")


def labeled(instance: Instance, plan: Plan) -> Plan:
    return compute_labels(plan, [a.delay_prob for a in instance.agents])


def _simulate_row(instance: Instance, plan: Plan, policy: str,
                  n_runs: int, seed: int) -> dict:
    report = validate_plan(instance, plan)
    if not report.is_valid and policy != "dummy":
        raise RuntimeError(
            f"solver emitted an invalid plan ({len(report.conflicts)} conflicts)")
    stats = monte_carlo(instance, plan, policy, n_runs, seed)
    return {
        "policy": policy,
        "mean_makespan": stats.mean_makespan,
        "ci95": stats.ci95,
        "messages": stats.messages,
        "mean_collisions": stats.mean_collisions,
        "timeouts": stats.timeouts,
    }


def run_bench(config: BenchConfig, log=None) -> tuple[list[dict], list[str]]:
    """Returns (rows, warnings). `log(msg)` receives progress lines."""
    log = log or (lambda msg: None)
    limits = SolveLimits(time_s=config.time_limit)
    rows: list[dict] = []
    warnings: list[str] = []

    def base_row(instance_id, solver, agents, t_hat_max=""):
        return {c: "" for c in CSV_COLUMNS} | {
            "experiment": config.experiment, "instance": instance_id,
            "solver": solver, "agents": agents, "t_hat_max": t_hat_max,
        }

    def bench_instance(instance_id, instance, solvers, policies, t_hat_max=""):
        for solver in solvers:
            result = solve_with(solver, instance, limits)
            row = base_row(instance_id, solver, instance.n_agents, t_hat_max)
            row["status"] = result.status
            log(f"{instance_id} {solver}: {result.status} "
                f"({result.wall_time:.3f}s)")
            row["_runtime"] = result.wall_time
            if result.solved:
                plan = labeled(instance, result.plan)
                row["approx_makespan"] = approximate_average_makespan(plan)
                for policy in policies:
                    sim = _simulate_row(instance, plan, policy,
                                        config.n_runs, config.seed)
                    rows.append(row | sim)
            else:
                rows.append(row)

    if config.experiment in ("exp1", "exp4"):
        policies = config.policies if config.experiment == "exp4" else ("mcp",)
        for k in range(config.n_instances):
            inst = generate_random_instance(
                config.width, config.height, config.blocked_fraction,
                config.agents, (0.0, config.p_hi), config.seed + k)
            bench_instance(f"random-{k + 1}", inst, config.solvers, policies)
        if config.experiment == "exp1":
            for k in range(config.n_instances):
                inst = generate_warehouse_instance(
                    config.warehouse, config.agents, (0.0, config.p_hi),
                    config.seed + 1000 + k)
                bench_instance(f"warehouse-{k + 1}", inst, config.solvers, policies)

    elif config.experiment == "exp2":
        base = generate_random_instance(
            config.width, config.height, config.blocked_fraction,
            config.agents, (0.0, config.p_hi), config.seed)
        sweep_means = []
        for t_max in config.t_hat_sweep:
            inst = resample_delays(base, 1.0 - 1.0 / t_max,
                                   config.seed + 7000 + t_max)
            bench_instance(f"t{t_max}", inst, config.solvers, ("mcp",),
                           t_hat_max=t_max)
            solved = [r for r in rows if r["instance"] == f"t{t_max}"
                      and r["status"] == "solved"]
            if solved:
                sweep_means.append((t_max, solved[0]["mean_makespan"]))
        for (ta, ma), (tb, mb) in zip(sweep_means, sweep_means[1:]):
            if not mb > ma:
                warnings.append(
                    f"mean makespan not increasing from t_hat_max {ta} to {tb} "
                    f"({ma:.2f} -> {mb:.2f})")

    elif config.experiment == "exp3":
        success = []
        for m in config.agent_counts:
            solved = 0
            for k in range(config.instances_per_count):
                inst = generate_random_instance(
                    config.width, config.height, config.blocked_fraction,
                    m, (0.0, config.p_hi), config.seed + 100 * m + k)
                before = len(rows)
                bench_instance(f"m{m}-{k + 1}", inst, config.solvers, ("mcp",))
                if any(r["status"] == "solved" for r in rows[before:]):
                    solved += 1
            success.append((m, solved / config.instances_per_count))
        for (ma, ra), (mb, rb) in zip(success, success[1:]):
            if rb > ra:
                warnings.append(
                    f"success rate increased from {ma} agents ({ra:.2f}) "
                    f"to {mb} agents ({rb:.2f})")
        for m, rate in success:
            rows.append({c: "" for c in CSV_COLUMNS} | {
                "experiment": "exp3", "instance": f"success-rate-{m}",
                "solver": "+".join(config.solvers), "agents": m,
                "status": f"{rate:.2f}",
            })
    else:
        raise ValueError(f"unknown experiment {config.experiment!r}")

    return rows, warnings


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row.get(c, "")) for c in CSV_COLUMNS])
    return buf.getvalue()


def rows_to_table(rows: list[dict]) -> str:
    cols = ["instance", "solver", "policy", "status", "runtime",
            "approx_makespan", "mean_makespan", "ci95", "messages",
            "mean_collisions"]
    table = [cols]
    for row in rows:
        r = dict(row)
        rt = r.pop("_runtime", "")
        r["runtime"] = f"{rt:.3f}" if rt != "" else ""
        table.append([
            _fmt(r.get(c, "")) if not isinstance(r.get(c, ""), float)
            else f"{r[c]:.2f}" for c in cols])
    widths = [max(len(line[i]) for line in table) for i in range(len(cols))]
    out = []
    for line in table:
        out.append("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip())
    return "\n".join(out) + "\n"
