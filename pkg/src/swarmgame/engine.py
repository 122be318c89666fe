"""Instance lifecycle and the authoritative fixed-step tick loop.

The engine is transport-free: connection handlers (or the headless
runner) feed parsed client messages in through queue_input/queue_color
and drive tick_once, which returns everything the transport layer must
broadcast for that tick. All timestamps are simulation time (tick
count times the tick period), never wall clock, so identical runs
produce identical logs.
"""

from __future__ import annotations

import hashlib
import heapq
import math
import random
import secrets
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable

from .config import ExplicitPlacement, InstanceConfig, config_to_dict
from .errors import CapabilityDenied, ContractViolation, PhaseConflict, PhysicsFault, SpecInfeasible
from .formation import CompletionStatus, update_completion
from .model import AgentColor, AgentState, WorldState, resolve_world, tick_to_ms
from .protocol import phase_frame
from .sensing import OverheadFrame, ScanFrame, neighborhood_scan, overhead_due, overhead_snapshot
from .sessionlog import SessionLogWriter, make_header

# Display-only lead-in shown by clients when an instance starts; the
# simulation itself begins ticking immediately.
COUNTDOWN_MS = 3000

PLACEMENT_ATTEMPTS = 10_000


def hash_token(token: str) -> str:
    return hashlib.sha256(token.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class PlayerIdentity:
    token: str
    token_hash: str
    ordinal: int
    session_id: str


class IdentityRegistry:
    """Session-scoped identities: one token per player, stable across
    instances. Logs and admin views only ever see the token hash."""

    def __init__(self, session_id: str = "session",
                 token_factory: Callable[[], str] | None = None):
        self.session_id = session_id
        self._factory = token_factory or (lambda: secrets.token_hex(16))
        self._by_token: dict[str, PlayerIdentity] = {}

    def hello(self, token: str | None) -> PlayerIdentity:
        """Rebind a known token, or mint a fresh identity otherwise."""
        if token is not None and token in self._by_token:
            return self._by_token[token]
        minted = self._factory()
        while minted in self._by_token:
            minted = self._factory()
        ident = PlayerIdentity(minted, hash_token(minted), len(self._by_token),
                               self.session_id)
        self._by_token[minted] = ident
        return ident

    def players(self) -> list[PlayerIdentity]:
        return sorted(self._by_token.values(), key=lambda p: p.ordinal)


@dataclass
class Binding:
    """One live connection's view: who it is and what it may drive."""
    identity: PlayerIdentity
    role: str  # "player" | "spectator"
    agent_id: int | None


@dataclass
class TickOutput:
    tick: int
    t_ms: int
    world: WorldState
    scans: dict[int, ScanFrame] = field(default_factory=dict)
    overhead: OverheadFrame | None = None
    events: list[dict] = field(default_factory=list)


class InstancePhase(Enum):
    LOBBY = "lobby"
    RUNNING = "running"
    COMPLETE = "complete"
    ABORTED = "aborted"


def place_agents(config: InstanceConfig,
                 roster: list[tuple[int, str]]) -> list[AgentState]:
    """Initial agents for (agent_id, token_hash) roster entries, in order.

    Uniform-random placement rejection-samples centers inside the walls
    with pairwise separation of one diameter, then draws each agent's
    color; both consume the one seeded generator, so a seed plus a
    roster fully determines the starting world.
    """
    r = config.physics.agent_radius
    if isinstance(config.placement, ExplicitPlacement):
        if len(roster) > len(config.placement.agents):
            raise SpecInfeasible("explicit placement has fewer entries than agents")
        return [
            AgentState(agent_id, x, y, AgentColor(color), frozenset(), token_hash)
            for (agent_id, token_hash), (x, y, color)
            in zip(roster, config.placement.agents)
        ]
    rng = random.Random(config.placement.seed)
    w, h = config.arena.width, config.arena.height
    min_sep_sq = (2 * r) ** 2
    positions: list[tuple[float, float]] = []
    for _ in roster:
        for _attempt in range(PLACEMENT_ATTEMPTS):
            x = rng.uniform(r, w - r)
            y = rng.uniform(r, h - r)
            if all((x - px) ** 2 + (y - py) ** 2 >= min_sep_sq for px, py in positions):
                positions.append((x, y))
                break
        else:
            raise SpecInfeasible(
                f"could not place {len(roster)} agents without overlap in a "
                f"{w:g}x{h:g} arena"
            )
    colors = [AgentColor(rng.randrange(3)) for _ in roster]
    return [
        AgentState(agent_id, x, y, color, frozenset(), token_hash)
        for (agent_id, token_hash), (x, y), color in zip(roster, positions, colors)
    ]


class InstanceEngine:
    """One instance: lobby bookkeeping, placement, ticking, logging."""

    def __init__(self, config: InstanceConfig, registry: IdentityRegistry,
                 log_dir: str | Path | None = None):
        self.config = config
        self.registry = registry
        self.log_dir = Path(log_dir) if log_dir is not None else None
        self.phase = InstancePhase.LOBBY
        self.phase_times: dict[str, int] = {"lobby": 0}
        self.world: WorldState | None = None
        self.completion = CompletionStatus()
        self.end_reason: str | None = None
        self.log_path: Path | None = None
        self._writer: SessionLogWriter | None = None
        self._queue: list[tuple[str, int, Any]] = []
        self._slots: dict[str, int] = {}  # token_hash -> agent_id
        self._slot_identity: dict[int, PlayerIdentity] = {}
        self._free_ids: list[int] = []
        self._next_id = 0
        self._connections: dict[str, Binding] = {}
        self._overhead_last = 0

    # ----- connections ------------------------------------------------

    def connect(self, identity: PlayerIdentity) -> Binding:
        """Bind a connection; spectator when the identity already has a
        live connection, the instance is full, or the join is late."""
        h = identity.token_hash
        if h in self._connections:
            return Binding(identity, "spectator", None)
        if h in self._slots:
            binding = Binding(identity, "player", self._slots[h])
            self._connections[h] = binding
            if self.phase is InstancePhase.RUNNING:
                self._log_event("join", agent_id=binding.agent_id)
            return binding
        if self.phase is InstancePhase.LOBBY and len(self._slots) < self.config.capacity:
            agent_id = heapq.heappop(self._free_ids) if self._free_ids else self._next_id
            if agent_id == self._next_id:
                self._next_id += 1
            self._slots[h] = agent_id
            self._slot_identity[agent_id] = identity
            binding = Binding(identity, "player", agent_id)
        else:
            binding = Binding(identity, "spectator", None)
        self._connections[h] = binding
        return binding

    def disconnect(self, binding: Binding) -> None:
        h = binding.identity.token_hash
        if self._connections.get(h) is not binding:
            return  # a secondary (spectating) connection of the same identity
        del self._connections[h]
        if binding.role != "player":
            return
        if self.phase is InstancePhase.LOBBY:
            agent_id = self._slots.pop(h)
            del self._slot_identity[agent_id]
            heapq.heappush(self._free_ids, agent_id)
        elif self.phase is InstancePhase.RUNNING:
            # Clear the latched intent through the normal input path so
            # the stop shows up in the log and in replays.
            self._queue.append(("input", binding.agent_id, frozenset()))
            self._log_event("leave", agent_id=binding.agent_id)

    # ----- lifecycle ----------------------------------------------------

    def start(self) -> list[dict]:
        if self.phase is not InstancePhase.LOBBY:
            raise PhaseConflict(f"start requires lobby phase, not {self.phase.value}")
        roster = [
            (agent_id, self._slot_identity[agent_id].token_hash)
            for agent_id in sorted(self._slot_identity)
        ]
        agents = place_agents(self.config, roster)
        self.world = WorldState(self.config.arena, agents, 0)
        if self.log_dir is not None:
            header = make_header(
                self.config.instance_id,
                config_to_dict(self.config),
                self.config.placement_seed,
                [
                    (agent_id, self._slot_identity[agent_id].ordinal, token_hash)
                    for agent_id, token_hash in roster
                ],
            )
            self._writer = SessionLogWriter(
                self.log_dir / f"{self.config.instance_id}.jsonl", header
            )
        self._log({"record": "event", "kind": "instance_start", "t_ms": 0})
        self.phase = InstancePhase.RUNNING
        self.phase_times["running"] = 0
        return [phase_frame("running", tick=0, countdown_ms=COUNTDOWN_MS)]

    def abort(self, reason: str) -> list[dict]:
        if self.phase is not InstancePhase.RUNNING:
            raise PhaseConflict(f"abort requires a running instance, not {self.phase.value}")
        tick = self.world.tick if self.world else 0
        t_ms = tick_to_ms(tick, self.config.physics.tick_rate)
        if self._writer is not None:
            # inputs drained earlier in an in-flight tick may already be
            # stamped one period ahead
            t_ms = max(t_ms, self._writer.last_t_ms)
        self.end_reason = f"aborted:{reason}"
        self._log({"record": "event", "kind": "instance_end", "t_ms": t_ms,
                   "reason": self.end_reason})
        self._close_log()
        self.phase = InstancePhase.ABORTED
        self.phase_times["aborted"] = t_ms
        return [phase_frame("aborted", tick=tick, reason=reason)]

    # ----- per-tick input ------------------------------------------------

    def queue_input(self, agent_id: int, keys: Iterable[str]) -> None:
        """Latch a full key set for an agent, effective next tick."""
        self._require_agent(agent_id)
        if self.phase is not InstancePhase.RUNNING:
            return  # pre-start and post-end inputs are dropped
        self._queue.append(("input", agent_id, frozenset(keys)))

    def queue_color(self, agent_id: int, color: AgentColor) -> None:
        if not self.config.capabilities.color_switching:
            raise CapabilityDenied("color switching is disabled for this instance")
        self._require_agent(agent_id)
        if self.phase is not InstancePhase.RUNNING:
            return
        self._queue.append(("color", agent_id, AgentColor(color)))

    def _require_agent(self, agent_id: int) -> None:
        if agent_id not in self._slot_identity:
            raise ContractViolation(f"no agent slot {agent_id}")

    # ----- the tick -----------------------------------------------------

    def tick_once(self) -> TickOutput:
        if self.phase is not InstancePhase.RUNNING:
            raise PhaseConflict("tick requires a running instance")
        assert self.world is not None
        cfg = self.config
        t_ms = tick_to_ms(self.world.tick + 1, cfg.physics.tick_rate)
        events: list[dict] = []

        # (1) queued messages take effect this tick, in arrival order
        pending, self._queue = self._queue, []
        by_id = {a.agent_id: a for a in self.world.agents}
        for kind, agent_id, payload in pending:
            agent = by_id.get(agent_id)
            if agent is None:
                continue
            if kind == "input":
                agent.intent = payload
                self._log({"record": "input", "t_ms": t_ms, "agent_id": agent_id,
                           "keys": sorted(payload)})
            elif agent.color != payload:
                agent.color = payload
                self._log({"record": "color", "t_ms": t_ms, "agent_id": agent_id,
                           "color": int(payload)})

        # (2) physics
        try:
            self.world = resolve_world(self.world, cfg.physics)
        except PhysicsFault as exc:
            events.extend(self.abort(f"physics_fault: {exc}"))
            return TickOutput(self.world.tick,
                              tick_to_ms(self.world.tick, cfg.physics.tick_rate),
                              self.world, {}, None, events)

        # (3) objective; undefined (and never satisfiable) below 3 agents
        if len(self.world.agents) >= 3:
            self.completion = update_completion(self.completion, self.world,
                                                cfg.formation, t_ms)

        # (4) overhead capture on its own cadence
        overhead: OverheadFrame | None = None
        if cfg.capabilities.global_sensing and overhead_due(
                self.world.tick, self._overhead_last, cfg.sensing, cfg.physics.tick_rate):
            overhead = overhead_snapshot(self.world, cfg.sensing)
            self._overhead_last = self.world.tick

        # (5) per-agent scans
        scans: dict[int, ScanFrame] = {}
        if cfg.capabilities.local_sensing:
            for agent in self.world.agents:
                scans[agent.agent_id] = neighborhood_scan(
                    self.world, agent.agent_id, cfg.sensing, cfg.physics.agent_radius)

        # (6) broadcast is the transport layer's job; frames are returned.

        # (7) state record
        self._log({
            "record": "state", "t_ms": t_ms, "tick": self.world.tick,
            "agents": [[a.agent_id, a.x, a.y, int(a.color)]
                       for a in sorted(self.world.agents, key=lambda a: a.agent_id)],
        })

        # (8) completion event and phase transition
        if self.completion.complete:
            self._log({"record": "event", "kind": "objective_complete", "t_ms": t_ms,
                       "residual": self.completion.residual})
            self.end_reason = "complete"
            self._log({"record": "event", "kind": "instance_end", "t_ms": t_ms,
                       "reason": "complete"})
            self._close_log()
            self.phase = InstancePhase.COMPLETE
            self.phase_times["complete"] = t_ms
            events.append(phase_frame("complete", tick=self.world.tick,
                                      residual=self.completion.residual))
        return TickOutput(self.world.tick, t_ms, self.world, scans, overhead, events)

    # ----- logging helpers ----------------------------------------------

    def _log(self, record: dict) -> None:
        if self._writer is None:
            return
        try:
            self._writer.write(record)
        except OSError:
            writer, self._writer = self._writer, None
            try:
                writer.close()
            except OSError:
                pass
            if self.phase is InstancePhase.RUNNING:
                self.phase = InstancePhase.ABORTED
                self.end_reason = "aborted:log_io_failure"

    def _log_event(self, kind: str, **payload: Any) -> None:
        tick = self.world.tick if self.world else 0
        self._log({"record": "event", "kind": kind,
                   "t_ms": tick_to_ms(tick, self.config.physics.tick_rate), **payload})

    def _close_log(self) -> None:
        if self._writer is not None:
            self.log_path = self._writer.close()
            self._writer = None

    # ----- introspection --------------------------------------------------

    def agent_id_for(self, token_hash: str) -> int | None:
        return self._slots.get(token_hash)

    def status(self) -> dict[str, Any]:
        residual = self.completion.residual
        return {
            "instance_id": self.config.instance_id,
            "phase": self.phase.value,
            "tick": self.world.tick if self.world else 0,
            "players": len(self._slots),
            "connected": len(self._connections),
            "completion": {
                "satisfied_now": self.completion.satisfied_now,
                "complete": self.completion.complete,
                "residual": residual if math.isfinite(residual) else None,
                "consensus": self.completion.consensus,
            },
            "end_reason": self.end_reason,
            "log_path": str(self.log_path) if self.log_path else None,
            "phase_times": dict(self.phase_times),
        }
