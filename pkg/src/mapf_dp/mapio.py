"""File formats: ASCII maps, agent CSV lines, and JSON plan files."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path as FilePath
from typing import Optional

from .model import AgentSpec, Graph, Instance, MapError, Path, Plan, parse_map, serialize_map


def agents_to_text(instance: Instance) -> str:
    """One line per agent: id,start_x,start_y,goal_x,goal_y,delay_prob."""
    meta = instance.graph.grid
    if meta is None:
        raise MapError("agents file needs grid coordinates")
    lines = []
    for a in instance.agents:
        sx, sy = meta.cell_of(a.start)
        gx, gy = meta.cell_of(a.goal)
        lines.append(f"{a.id},{sx},{sy},{gx},{gy},{a.delay_prob:.9g}")
    return "\n".join(lines) + "\n"


def agents_from_text(graph: Graph, text: str) -> tuple[AgentSpec, ...]:
    meta = graph.grid
    if meta is None:
        raise MapError("agents file needs grid coordinates")
    agents = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise MapError(f"agents line {lineno}: expected 6 fields, got {len(parts)}")
        aid, sx, sy, gx, gy = (int(p) for p in parts[:5])
        agents.append(AgentSpec(aid, meta.vertex_at(sx, sy), meta.vertex_at(gx, gy),
                                float(parts[5])))
    return tuple(agents)


def instance_checksum(instance: Instance) -> str:
    """Stable digest of the map layout and agent list, for plan/instance pairing."""
    h = hashlib.sha256()
    if instance.graph.grid is not None:
        h.update(serialize_map(instance.graph).encode())
        h.update(agents_to_text(instance).encode())
    else:
        h.update(repr(instance.graph.adjacency).encode())
        h.update(repr([(a.id, a.start, a.goal, round(a.delay_prob, 12))
                       for a in instance.agents]).encode())
    return h.hexdigest()[:16]


def write_instance(instance: Instance, map_path, agents_path) -> None:
    FilePath(map_path).write_text(serialize_map(instance.graph))
    FilePath(agents_path).write_text(agents_to_text(instance))


def read_instance(map_path, agents_path) -> Instance:
    graph = parse_map(FilePath(map_path).read_text())
    agents = agents_from_text(graph, FilePath(agents_path).read_text())
    return Instance(graph, agents)


def plan_to_json(plan: Plan, checksum: str, solver: str = "",
                 extra: Optional[dict] = None) -> str:
    doc = {
        "checksum": checksum,
        "solver": solver,
        "agents": [
            {
                "id": i,
                "path": list(p.vertices),
                **({"labels": [round(v, 9) for v in p.labels]} if p.labels else {}),
            }
            for i, p in enumerate(plan.paths)
        ],
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def plan_from_json(text: str) -> tuple[Plan, str]:
    doc = json.loads(text)
    entries = sorted(doc["agents"], key=lambda e: e["id"])
    paths = tuple(
        Path(tuple(e["path"]),
             tuple(e["labels"]) if "labels" in e else None)
        for e in entries
    )
    return Plan(paths), doc.get("checksum", "")


def write_plan(path, plan: Plan, checksum: str, solver: str = "",
               extra: Optional[dict] = None) -> None:
    FilePath(path).write_text(plan_to_json(plan, checksum, solver, extra))


def read_plan(path) -> tuple[Plan, str]:
    return plan_from_json(FilePath(path).read_text())
