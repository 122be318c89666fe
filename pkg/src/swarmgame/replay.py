"""Deterministic replay and metric extraction from session logs.

Replay rebuilds the starting world from the header (config, placement
seed, roster), feeds the logged input and color records back in at
their ticks, and demands that every recomputed state record matches the
logged one byte for byte once serialized. Any mismatch is reported as
a DivergenceError carrying the first divergent tick.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .config import config_from_dict
from .engine import place_agents
from .errors import DivergenceError, ParseError
from .formation import distance_to_pattern, task_duration_ms
from .model import AgentColor, WorldState, resolve_world
from .sessionlog import LOG_VERSION, LogDocument, read_log


def _state_payload(world: WorldState) -> list[list]:
    return [[a.agent_id, a.x, a.y, int(a.color)]
            for a in sorted(world.agents, key=lambda a: a.agent_id)]


def _canon(payload) -> str:
    return json.dumps(payload, separators=(",", ":"), sort_keys=True)


def initial_world(doc: LogDocument) -> WorldState:
    """The tick-0 world implied by a log header."""
    cfg = config_from_dict(doc.header["config"])
    roster = [(e["agent_id"], e["token_hash"]) for e in doc.header["roster"]]
    return WorldState(cfg.arena, place_agents(cfg, roster), 0)


def replay(log: LogDocument | str | Path) -> list[WorldState]:
    """Re-simulate a log; returns the world trajectory including tick 0."""
    doc = log if isinstance(log, LogDocument) else read_log(log, strict=False)
    if doc.header.get("version") != LOG_VERSION:
        raise ParseError(
            f"log version {doc.header.get('version')!r} does not match {LOG_VERSION!r}"
        )
    cfg = config_from_dict(doc.header["config"])
    world = initial_world(doc)
    trajectory = [world]

    for rec in doc.records:
        kind = rec["record"]
        if kind == "input":
            agent = next((a for a in world.agents if a.agent_id == rec["agent_id"]), None)
            if agent is not None:
                agent.intent = frozenset(rec["keys"])
        elif kind == "color":
            agent = next((a for a in world.agents if a.agent_id == rec["agent_id"]), None)
            if agent is not None:
                agent.color = AgentColor(rec["color"])
        elif kind == "state":
            world = resolve_world(world, cfg.physics)
            if world.tick != rec["tick"]:
                raise DivergenceError(rec["tick"],
                                      f"expected tick {rec['tick']}, simulated {world.tick}")
            got = _canon(_state_payload(world))
            want = _canon(rec["agents"])
            if got != want:
                raise DivergenceError(rec["tick"], f"state mismatch: {got} != {want}")
            trajectory.append(world)
    return trajectory


@dataclass(frozen=True)
class AgentMetrics:
    agent_id: int
    path_length_px: float
    color_switches: int


@dataclass(frozen=True)
class MetricsReport:
    instance_id: str
    ticks: int
    task_duration_ms: int | None  # None = incomplete
    time_to_consensus_ms: int | None
    final_residual: float | None
    agents: tuple[AgentMetrics, ...]

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "ticks": self.ticks,
            "task_duration_ms": self.task_duration_ms,
            "task_complete": self.task_duration_ms is not None,
            "time_to_consensus_ms": self.time_to_consensus_ms,
            "final_residual": self.final_residual,
            "agents": [
                {"agent_id": a.agent_id, "path_length_px": a.path_length_px,
                 "color_switches": a.color_switches}
                for a in self.agents
            ],
        }


def metrics(log: LogDocument | str | Path) -> MetricsReport:
    """Summary numbers for one instance log."""
    doc = log if isinstance(log, LogDocument) else read_log(log, strict=False)
    duration = task_duration_ms(doc.records)

    path: dict[int, float] = {}
    last_pos: dict[int, tuple[float, float]] = {}
    switches: dict[int, int] = {}
    consensus_since: int | None = None
    last_state: dict | None = None
    ticks = 0

    for entry in doc.header.get("roster", []):
        path[entry["agent_id"]] = 0.0
        switches[entry["agent_id"]] = 0
    # seed positions from the placement so the first tick's movement counts
    if doc.header.get("config") and doc.header.get("roster"):
        for agent in initial_world(doc).agents:
            last_pos[agent.agent_id] = (agent.x, agent.y)

    for rec in doc.records:
        if rec["record"] == "color":
            switches[rec["agent_id"]] = switches.get(rec["agent_id"], 0) + 1
        elif rec["record"] == "state":
            last_state = rec
            ticks = rec["tick"]
            colors = set()
            for agent_id, x, y, color in rec["agents"]:
                if agent_id in last_pos:
                    px, py = last_pos[agent_id]
                    path[agent_id] = path.get(agent_id, 0.0) + math.hypot(x - px, y - py)
                last_pos[agent_id] = (x, y)
                colors.add(color)
            if len(colors) == 1 and rec["agents"]:
                if consensus_since is None:
                    consensus_since = rec["t_ms"]
            else:
                consensus_since = None

    final_residual: float | None = None
    if last_state is not None and last_state["agents"]:
        cfg = config_from_dict(doc.header["config"])
        final_residual = max(
            distance_to_pattern((x, y), cfg.formation.pattern)
            for _, x, y, _ in last_state["agents"]
        )

    return MetricsReport(
        instance_id=doc.header.get("instance_id", "?"),
        ticks=ticks,
        task_duration_ms=duration,
        time_to_consensus_ms=consensus_since,
        final_residual=final_residual,
        agents=tuple(
            AgentMetrics(agent_id, path.get(agent_id, 0.0), switches.get(agent_id, 0))
            for agent_id in sorted(path)
        ),
    )
