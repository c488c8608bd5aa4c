"""Random grid and warehouse instance generators.

Delay probabilities are sampled through the expected per-move duration:
draw t_hat uniformly from (1, t_hat_max) with t_hat_max = 1 / (1 - hi)
and set p = 1 - 1 / t_hat, so a range (0, 1/2) corresponds to t_hat_max = 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AgentSpec, Graph, Instance, parse_map


class GenerationError(ValueError):
    """Raised when the requested parameters cannot yield a feasible instance."""


def _sample_delay_probs(rng: np.random.Generator, m: int, hi: float) -> np.ndarray:
    if not 0.0 < hi < 1.0:
        raise GenerationError(f"upper delay probability must be in (0, 1), got {hi}")
    t_hat_max = 1.0 / (1.0 - hi)
    t_hat = rng.uniform(1.0, t_hat_max, size=m)
    # uniform(1, t_max) can return exactly 1.0, which would give p = 0
    t_hat = np.maximum(t_hat, 1.0 + 1e-12)
    return 1.0 - 1.0 / t_hat


def _largest_component(graph: Graph) -> list[int]:
    seen = [False] * graph.n_vertices
    best: list[int] = []
    for s in range(graph.n_vertices):
        if seen[s]:
            continue
        comp = [s]
        seen[s] = True
        head = 0
        while head < len(comp):
            u = comp[head]
            head += 1
            for v in graph.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
        if len(comp) > len(best):
            best = comp
    return sorted(best)


def _build_instance(graph: Graph, starts, goals, probs) -> Instance:
    agents = tuple(
        AgentSpec(i, int(s), int(g), float(p))
        for i, (s, g, p) in enumerate(zip(starts, goals, probs))
    )
    return Instance(graph, agents)


def generate_random_instance(width: int, height: int, blocked_fraction: float,
                             m: int, p_range: tuple[float, float],
                             seed: int) -> Instance:
    """Random 4-neighbor grid with uniformly blocked cells and m agents."""
    rng = np.random.default_rng(seed)
    n_cells = width * height
    n_blocked = int(round(blocked_fraction * n_cells))
    blocked = set(rng.choice(n_cells, size=n_blocked, replace=False).tolist())
    rows = []
    for y in range(height):
        rows.append("".join("@" if y * width + x in blocked else "."
                            for x in range(width)))
    graph = parse_map("\n".join(rows))
    comp = _largest_component(graph)
    if len(comp) < m:
        raise GenerationError(
            f"largest free component has {len(comp)} cells, need {m} for starts")
    starts = rng.choice(comp, size=m, replace=False)
    goals = rng.choice(comp, size=m, replace=False)
    probs = _sample_delay_probs(rng, m, p_range[1])
    return _build_instance(graph, starts, goals, probs)


@dataclass
class WarehouseParams:
    """Parametric shelf layout: blocked rectangles in a grid of aisles."""

    shelf_width: int = 4
    shelf_height: int = 2
    shelf_cols: int = 3
    shelf_rows: int = 3
    aisle_width: int = 1
    side_width: int = 3

    @property
    def grid_width(self) -> int:
        inner = self.shelf_cols * self.shelf_width
        if self.shelf_cols > 0:
            inner += (self.shelf_cols - 1) * self.aisle_width
        return 2 * self.side_width + inner

    @property
    def grid_height(self) -> int:
        return (self.shelf_rows * self.shelf_height
                + (self.shelf_rows + 1) * self.aisle_width)


def warehouse_graph(params: WarehouseParams) -> Graph:
    w, h = params.grid_width, params.grid_height
    blocked = set()
    for r in range(params.shelf_rows):
        y0 = params.aisle_width + r * (params.shelf_height + params.aisle_width)
        for c in range(params.shelf_cols):
            x0 = params.side_width + c * (params.shelf_width + params.aisle_width)
            for dy in range(params.shelf_height):
                for dx in range(params.shelf_width):
                    blocked.add((x0 + dx, y0 + dy))
    rows = []
    for y in range(h):
        rows.append("".join("@" if (x, y) in blocked else "." for x in range(w)))
    return parse_map("\n".join(rows))


def generate_warehouse_instance(params: WarehouseParams, m: int,
                                p_range: tuple[float, float],
                                seed: int) -> Instance:
    """Warehouse instance: starts on one side corridor, goals on the other."""
    rng = np.random.default_rng(seed)
    graph = warehouse_graph(params)
    meta = graph.grid
    assert meta is not None
    comp = set(_largest_component(graph))
    left = [meta.vertex_at(x, y)
            for y in range(meta.height) for x in range(params.side_width)
            if meta.free[y * meta.width + x]]
    right = [meta.vertex_at(x, y)
             for y in range(meta.height)
             for x in range(meta.width - params.side_width, meta.width)
             if meta.free[y * meta.width + x]]
    left = [v for v in left if v in comp]
    right = [v for v in right if v in comp]
    if min(len(left), len(right)) < m:
        raise GenerationError(
            f"side corridors hold {len(left)}/{len(right)} cells, need {m}")
    # per-agent travel direction: left-to-right or right-to-left
    eastbound = rng.random(m) < 0.5
    left_pick = rng.choice(left, size=m, replace=False)
    right_pick = rng.choice(right, size=m, replace=False)
    starts = np.where(eastbound, left_pick, right_pick)
    goals = np.where(eastbound, right_pick, left_pick)
    probs = _sample_delay_probs(rng, m, p_range[1])
    return _build_instance(graph, starts, goals, probs)


def resample_delays(instance: Instance, hi: float, seed: int) -> Instance:
    """Same layout and start/goal cells, fresh delay probabilities from (0, hi)."""
    rng = np.random.default_rng(seed)
    probs = _sample_delay_probs(rng, instance.n_agents, hi)
    agents = tuple(
        AgentSpec(a.id, a.start, a.goal, float(p))
        for a, p in zip(instance.agents, probs)
    )
    return Instance(instance.graph, agents)
