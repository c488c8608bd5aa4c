"""Execution partial order over local states, its transitive reduction,
message schedules for minimal-communication execution, and approximate
average entry-time labels.

Nodes of the dependency graph are (agent, index) pairs.  Intra-agent chain
edges (i, x) -> (i, x+1) always exist; an inter-agent edge
(j, x'+1) -> (i, x+1) exists whenever agent j passes through the vertex that
agent i enters at index x+1, at some strictly earlier index x' < x.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .model import Plan

Node = tuple[int, int]  # (agent, local-state index)


class DependencyError(ValueError):
    """Structural problem in a dependency graph (bad edge direction, cycle)."""


@dataclass
class DependencyGraph:
    nodes: list[Node]
    edges: set[tuple[Node, Node]]
    reduced: bool = False

    @property
    def inter_agent_edges(self) -> set[tuple[Node, Node]]:
        return {(u, v) for u, v in self.edges if u[0] != v[0]}

    @property
    def chain_edges(self) -> set[tuple[Node, Node]]:
        return {(u, v) for u, v in self.edges if u[0] == v[0]}


def build_partial_order(plan: Plan) -> DependencyGraph:
    """Unreduced partial order implied by a valid plan."""
    nodes = [(i, x) for i, p in enumerate(plan.paths) for x in range(p.last_index + 1)]
    edges: set[tuple[Node, Node]] = set()
    for i, p in enumerate(plan.paths):
        for x in range(p.last_index):
            edges.add(((i, x), (i, x + 1)))
    # last visit index of each vertex per agent, scanned in index order
    for i, pi in enumerate(plan.paths):
        for j, pj in enumerate(plan.paths):
            if i == j:
                continue
            for x in range(pi.last_index):   # target (i, x + 1)
                v = pi.vertices[x + 1]
                for xp in range(min(x, pj.last_index)):   # x' < x, x' < X_j
                    if pj.vertices[xp] == v:
                        edges.add(((j, xp + 1), (i, x + 1)))
    for (j, y), (i, x) in edges:
        if y >= x:
            raise DependencyError(
                f"edge ({j},{y}) -> ({i},{x}) does not increase the index; "
                "was the plan validated?")
    return DependencyGraph(nodes, edges, reduced=False)


def transitive_reduction(dg: DependencyGraph) -> DependencyGraph:
    """Unique transitive reduction of a DAG via reachability bitsets.

    Every edge increases the local-state index, so sorting nodes by index
    gives a topological order directly.
    """
    order = sorted(dg.nodes, key=lambda n: n[1])
    pos = {n: k for k, n in enumerate(order)}
    succ: dict[Node, list[Node]] = defaultdict(list)
    for u, v in dg.edges:
        if pos[u] >= pos[v] and u[1] >= v[1]:
            raise DependencyError("cycle or non-monotone edge in dependency graph")
        succ[u].append(v)
    # reach[n] = bitmask of nodes reachable from n (including n)
    reach: dict[Node, int] = {}
    for n in reversed(order):
        mask = 1 << pos[n]
        for s in succ.get(n, ()):
            mask |= reach[s]
        reach[n] = mask
    kept: set[tuple[Node, Node]] = set()
    for u in dg.nodes:
        outs = succ.get(u, ())
        for v in outs:
            bit = 1 << pos[v]
            implied = any(w != v and reach[w] & bit for w in outs)
            if not implied:
                kept.add((u, v))
    return DependencyGraph(list(dg.nodes), kept, reduced=True)


@dataclass
class MessageSchedule:
    """Who messages whom on local-state entry, and cumulative GO thresholds.

    senders[(j, y)] = sorted recipients that j notifies when entering state y.
    thresholds[i][x] = {j: count} -- messages agent i must hold from each j
    before it may leave local state x; absent senders need zero.
    """

    senders: dict[Node, tuple[int, ...]] = field(default_factory=dict)
    thresholds: dict[int, list[dict[int, int]]] = field(default_factory=dict)
    total_messages: int = 0


def message_schedule(dg: DependencyGraph, plan: Plan) -> MessageSchedule:
    if not dg.reduced:
        raise DependencyError("message schedule requires a reduced dependency graph")
    inter = dg.inter_agent_edges
    send_map: dict[Node, set[int]] = defaultdict(set)
    # (sender-state, recipient) pairs; one message even if several target states
    targets: dict[tuple[Node, int], set[int]] = defaultdict(set)
    for (j, y), (i, x) in inter:
        send_map[(j, y)].add(i)
        targets[((j, y), i)].add(x)
    # a sender state with reduced edges to two states of one recipient would make
    # edge-counting and message-counting diverge; not observed for valid plans
    for (node, i), xs in targets.items():
        assert len(xs) == 1, f"sender state {node} feeds recipient {i} at {sorted(xs)}"
    schedule = MessageSchedule()
    schedule.senders = {n: tuple(sorted(rs)) for n, rs in send_map.items()}
    schedule.total_messages = sum(len(rs) for rs in send_map.values())
    for i, path in enumerate(plan.paths):
        per_x: list[dict[int, int]] = []
        cum: dict[int, int] = defaultdict(int)
        # incoming message (from (j, y) -> (i, x)) is required before i leaves x - 1
        incoming: dict[int, list[int]] = defaultdict(list)
        for (j, y), (ti, x) in inter:
            if ti == i:
                incoming[x].append(j)
        for x in range(path.last_index + 1):
            for j in incoming.get(x + 1, ()):
                cum[j] += 1
            per_x.append(dict(cum))
        schedule.thresholds[i] = per_x
    return schedule


def move_cost(delay_prob: float) -> float:
    return 1.0 / (1.0 - delay_prob)


def compute_labels(plan: Plan, delay_probs: list[float],
                   dg: DependencyGraph | None = None) -> Plan:
    """Approximate average entry-time labels, evaluated in index order.

    label(i, 0) = 0; label(i, x) = max over all partial-order predecessors of
    their labels, plus 1 for a wait step or 1/(1-p_i) for a move step.
    """
    if dg is None:
        dg = build_partial_order(plan)
    preds: dict[Node, list[Node]] = defaultdict(list)
    for u, v in dg.edges:
        preds[v].append(u)
    labels: list[list[float]] = [[0.0] * (p.last_index + 1) for p in plan.paths]
    max_x = plan.max_index
    for x in range(1, max_x + 1):
        for i, path in enumerate(plan.paths):
            if x > path.last_index:
                continue
            t_hat = 1.0 if path.vertices[x] == path.vertices[x - 1] \
                else move_cost(delay_probs[i])
            best = max(labels[j][y] for j, y in preds[(i, x)])
            labels[i][x] = best + t_hat
    return plan.with_labels(labels)


def approximate_average_makespan(labeled_plan: Plan) -> float:
    """max over agents of the label at the last local state."""
    out = 0.0
    for p in labeled_plan.paths:
        if p.labels is None:
            raise ValueError("plan is not labeled")
        out = max(out, p.labels[-1])
    return out


def dependency_stats(plan: Plan) -> dict:
    """Edge counts before/after reduction and the message total, for reports."""
    dg = build_partial_order(plan)
    red = transitive_reduction(dg)
    sched = message_schedule(red, plan)
    return {
        "nodes": len(dg.nodes),
        "edges": len(dg.edges),
        "inter_agent_edges": len(dg.inter_agent_edges),
        "reduced_edges": len(red.edges),
        "reduced_inter_agent_edges": len(red.inter_agent_edges),
        "messages": sched.total_messages,
    }
