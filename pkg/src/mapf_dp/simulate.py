"""Discrete-time Monte Carlo execution of plans under GO/STOP policies.

Each step runs synchronously: commands are computed from the state at the
start of the step, moves succeed with probability 1 - p_i (waits always
succeed), and messages emitted on local-state entry become readable at the
next step (plus an optional delivery latency, default 0).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dependency import MessageSchedule, build_partial_order, message_schedule, transitive_reduction
from .model import Instance, Plan

GO = True
STOP = False

POLICIES = ("mcp", "fsp", "dummy")


@dataclass
class Collision:
    t: int
    kind: str           # "vertex" | "edge"
    agent_i: int
    agent_j: int
    location: tuple     # (v,) for vertex, (u, v) for edge


@dataclass
class ExecutionTrace:
    status: str                      # "done" | "timeout" | "deadlock"
    makespan: Optional[int]
    messages_sent: int
    collisions: list[Collision]
    snapshots: Optional[list[tuple[int, ...]]] = None   # local states per step


@dataclass
class RunStats:
    n_runs: int
    mean_makespan: float
    ci95: float
    mean_collisions: float
    messages: int
    timeouts: int
    policy: str

    def as_dict(self) -> dict:
        return {
            "n_runs": self.n_runs,
            "mean_makespan": self.mean_makespan,
            "ci95": self.ci95,
            "messages": self.messages,
            "mean_collisions": self.mean_collisions,
            "timeouts": self.timeouts,
            "policy": self.policy,
        }


def stats_ci(samples) -> tuple[float, float]:
    """Sample mean and 95% half-width 1.96 * s / sqrt(n); zero for n <= 1."""
    xs = list(samples)
    n = len(xs)
    mean = sum(xs) / n
    if n == 1:
        return mean, 0.0
    var = sum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, 1.96 * math.sqrt(var) / math.sqrt(n)


def default_horizon_cap(plan: Plan) -> int:
    return max(1000, 50 * plan.max_index)


def mcp_schedule(plan: Plan) -> MessageSchedule:
    return message_schedule(transitive_reduction(build_partial_order(plan)), plan)


def step(local: list[int], commands: list[bool], plan: Plan,
         delay_probs: list[float], rng) -> list[int]:
    """Advance each agent per its command; returns indices of advanced agents."""
    advanced = []
    for i, path in enumerate(plan.paths):
        x = local[i]
        if not commands[i] or x == path.last_index:
            continue
        if path.vertices[x] == path.vertices[x + 1]:   # wait never fails
            local[i] = x + 1
            advanced.append(i)
        elif rng.random() >= delay_probs[i]:
            local[i] = x + 1
            advanced.append(i)
    return advanced


def commands_dummy(local: list[int], plan: Plan) -> list[bool]:
    return [x < p.last_index for x, p in zip(local, plan.paths)]


def commands_fsp(local: list[int], delivered: list[int], plan: Plan) -> list[bool]:
    """GO iff every other agent has finished or holds at least x messages sent."""
    last = [p.last_index for p in plan.paths]
    m = len(local)
    # two smallest delivered counts among unfinished senders, for self-exclusion
    lo1 = lo2 = math.inf
    arg1 = -1
    for j in range(m):
        if delivered[j] < last[j]:
            if delivered[j] < lo1:
                lo2, lo1, arg1 = lo1, delivered[j], j
            elif delivered[j] < lo2:
                lo2 = delivered[j]
    cmds = []
    for i in range(m):
        if local[i] >= last[i]:
            cmds.append(STOP)
            continue
        bound = lo2 if arg1 == i else lo1
        cmds.append(local[i] <= bound)
    return cmds


def commands_mcp(local: list[int], received: list[dict[int, int]], plan: Plan,
                 thresholds: list[list[tuple[tuple[int, int], ...]]]) -> list[bool]:
    cmds = []
    for i, path in enumerate(plan.paths):
        x = local[i]
        if x >= path.last_index:
            cmds.append(STOP)
            continue
        ok = all(received[i].get(j, 0) >= need for j, need in thresholds[i][x])
        cmds.append(ok)
    return cmds


def _pack_thresholds(schedule: MessageSchedule, plan: Plan):
    packed = []
    for i, path in enumerate(plan.paths):
        per_x = schedule.thresholds[i]
        packed.append([tuple(sorted(d.items())) for d in per_x])
    return packed


def run_execution(instance: Instance, plan: Plan, policy: str, rng,
                  schedule: Optional[MessageSchedule] = None,
                  horizon_cap: Optional[int] = None,
                  latency: int = 0,
                  record: bool = False) -> ExecutionTrace:
    """Execute a plan once under the given policy and seeded rng."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if isinstance(rng, int):
        rng = random.Random(rng)
    if policy == "mcp" and schedule is None:
        schedule = mcp_schedule(plan)
    if horizon_cap is None:
        horizon_cap = default_horizon_cap(plan)

    m = plan.n_agents
    last = [p.last_index for p in plan.paths]
    delay = [a.delay_prob for a in instance.agents]
    local = [0] * m
    delivered = [0] * m                         # fsp: broadcasts readable per sender
    received: list[dict[int, int]] = [dict() for _ in range(m)]   # mcp counts
    pending: list[tuple[int, int, tuple[int, ...]]] = []  # (deliver_t, sender, recipients)
    thresholds = _pack_thresholds(schedule, plan) if policy == "mcp" else None
    messages_sent = 0
    collisions: list[Collision] = []
    snapshots = [tuple(local)] if record else None

    if all(x == lx for x, lx in zip(local, last)):
        return ExecutionTrace("done", 0, 0, [], snapshots)

    t = 0
    while t < horizon_cap:
        if pending:
            still = []
            for dt, sender, recips in pending:
                if dt <= t:
                    delivered[sender] += 1
                    for r in recips:
                        received[r][sender] = received[r].get(sender, 0) + 1
                else:
                    still.append((dt, sender, recips))
            pending = still

        if policy == "fsp":
            cmds = commands_fsp(local, delivered, plan)
        elif policy == "mcp":
            cmds = commands_mcp(local, received, plan, thresholds)
        else:
            cmds = commands_dummy(local, plan)

        if not any(cmds) and not pending:
            return ExecutionTrace("deadlock", None, messages_sent, collisions, snapshots)

        before = list(local)
        advanced = step(local, cmds, plan, delay, rng)

        # vertex collisions: shared occupancy at end of step
        occupancy: dict[int, list[int]] = {}
        for i in range(m):
            occupancy.setdefault(plan.paths[i].vertices[local[i]], []).append(i)
        for v, occupants in occupancy.items():
            if len(occupants) > 1:
                for a in range(len(occupants)):
                    for b in range(a + 1, len(occupants)):
                        collisions.append(
                            Collision(t, "vertex", occupants[a], occupants[b], (v,)))
        # edge collisions: opposite traversal of one edge in the same step
        moves: dict[tuple[int, int], int] = {}
        for i in advanced:
            u = plan.paths[i].vertices[before[i]]
            v = plan.paths[i].vertices[local[i]]
            if u != v:
                moves[(u, v)] = i
        for (u, v), i in moves.items():
            j = moves.get((v, u))
            if j is not None and i < j:
                collisions.append(Collision(t, "edge", i, j, (u, v)))

        if policy != "dummy":
            for j in advanced:
                if policy == "fsp":
                    recips = tuple(k for k in range(m) if k != j)
                else:
                    recips = schedule.senders.get((j, local[j]), ())
                if recips:
                    messages_sent += len(recips)
                    pending.append((t + 1 + latency, j, recips))

        t += 1
        if record:
            snapshots.append(tuple(local))
        if all(x == lx for x, lx in zip(local, last)):
            return ExecutionTrace("done", t, messages_sent, collisions, snapshots)

    return ExecutionTrace("timeout", None, messages_sent, collisions, snapshots)


def run_seed(master_seed: int, run_index: int) -> random.Random:
    """Counter-split per-run generator, independent of execution order."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(run_index,))
    return random.Random(int(ss.generate_state(2, np.uint64)[0]))


def monte_carlo(instance: Instance, plan: Plan, policy: str, n_runs: int,
                seed: int, horizon_cap: Optional[int] = None,
                latency: int = 0) -> RunStats:
    """Aggregate makespan/collision/message statistics over seeded runs."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    schedule = mcp_schedule(plan) if policy == "mcp" else None
    makespans = []
    collision_counts = []
    messages = 0
    timeouts = 0
    for k in range(n_runs):
        trace = run_execution(instance, plan, policy, run_seed(seed, k),
                              schedule=schedule, horizon_cap=horizon_cap,
                              latency=latency)
        if trace.status == "deadlock":
            raise RuntimeError(f"deadlock during {policy} execution (run {k})")
        if trace.status == "timeout":
            timeouts += 1
        else:
            makespans.append(trace.makespan)
            messages = trace.messages_sent
        collision_counts.append(len(trace.collisions))
    if makespans:
        mean, half = stats_ci(makespans)
    else:
        mean, half = math.nan, math.nan
    mean_coll, _ = stats_ci(collision_counts)
    return RunStats(n_runs, mean, half, mean_coll, messages, timeouts, policy)
