"""Scripted policies and a headless runner.

Bots talk to the engine through the real wire codec in both directions:
server frames are encoded to JSON text and decoded on the bot side
before a policy sees them, and policy actions are encoded as client
frames and run through the normal parse path. A headless run is
therefore a protocol test as much as a mechanics test. Time is virtual;
no sleeping happens anywhere.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Protocol, Sequence

import json

from .config import InstanceConfig, config_to_dict
from .engine import Binding, IdentityRegistry, InstanceEngine, InstancePhase
from .errors import CapabilityDenied
from .formation import perimeter_points
from .model import COLOR_KEYS, KEY_DOWN, KEY_LEFT, KEY_RIGHT, KEY_UP
from .protocol import (
    encode,
    error_frame,
    overhead_message,
    parse_client_message,
    scan_message,
    welcome_frame,
)
from .sensing import KIND_NONE, KIND_WALL, OverheadFrame
from .sessionlog import LogDocument, read_log

_DIAG = math.sqrt(0.5)

# Key sets in tie-break order: lexicographic over key tuples ranked
# Up < Down < Left < Right, so a bearing exactly between two compass
# directions resolves to the earlier set (N/NE boundary -> {Up}).
_COMPASS: tuple[tuple[tuple[str, ...], tuple[float, float]], ...] = (
    ((KEY_UP,), (0.0, -1.0)),
    ((KEY_UP, KEY_LEFT), (-_DIAG, -_DIAG)),
    ((KEY_UP, KEY_RIGHT), (_DIAG, -_DIAG)),
    ((KEY_DOWN,), (0.0, 1.0)),
    ((KEY_DOWN, KEY_LEFT), (-_DIAG, _DIAG)),
    ((KEY_DOWN, KEY_RIGHT), (_DIAG, _DIAG)),
    ((KEY_LEFT,), (-1.0, 0.0)),
    ((KEY_RIGHT,), (1.0, 0.0)),
)

_COS_TIE_BAND = 1e-9


def compass_keys(dx: float, dy: float) -> frozenset[str]:
    """The arrow-key set whose direction lies closest to (dx, dy)."""
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        return frozenset()
    best_keys: tuple[str, ...] = ()
    best_dot = -math.inf
    for keys, (ux, uy) in _COMPASS:
        dot = (dx * ux + dy * uy) / norm
        if dot > best_dot + _COS_TIE_BAND:
            best_keys = keys
            best_dot = dot
    return frozenset(best_keys)


@dataclass(frozen=True)
class PolicyObservation:
    """Exactly what a human player would have in front of them, plus a
    privileged own-position field that only test policies may use."""
    tick: int
    self_color: int | None
    scan: tuple[tuple[float, int], ...] | None
    overhead: OverheadFrame | None
    overhead_age_ticks: int | None
    self_pos: tuple[float, float] | None = None


@dataclass(frozen=True)
class PolicyAction:
    keys: frozenset[str] = frozenset()
    color_key: str | None = None


class Policy(Protocol):
    privileged: bool

    def act(self, obs: PolicyObservation) -> PolicyAction: ...


@dataclass
class OraclePolicy:
    """Beeline to a known perimeter slot; set the target color once.

    Privileged: navigates with its own true position, which no real
    player has. Good for driving the objective deterministically.
    """
    target: tuple[float, float]
    target_color_key: str | None = None
    stop_radius: float = 10.0
    privileged: bool = True
    _color_sent: bool = field(default=False, repr=False)

    def act(self, obs: PolicyObservation) -> PolicyAction:
        color_key = None
        if self.target_color_key is not None and not self._color_sent:
            color_key = self.target_color_key
            self._color_sent = True
        if obs.self_pos is None:
            return PolicyAction(frozenset(), color_key)
        dx = self.target[0] - obs.self_pos[0]
        dy = self.target[1] - obs.self_pos[1]
        if math.hypot(dx, dy) <= self.stop_radius:
            return PolicyAction(frozenset(), color_key)
        return PolicyAction(compass_keys(dx, dy), color_key)


@dataclass
class LocalPolicy:
    """Reactive scan-only behavior: flee anything closer than the
    separation margin, otherwise skirt along the nearest wall."""
    separation_px: float = 24.0  # 2 * agent_radius + 4 at defaults
    privileged: bool = False

    def act(self, obs: PolicyObservation) -> PolicyAction:
        scan = obs.scan or ()
        n = len(scan)
        nearest_i = -1
        nearest_d = math.inf
        nearest_wall_i = -1
        nearest_wall_d = math.inf
        for i, (dist, kind) in enumerate(scan):
            if kind == KIND_NONE:
                continue
            if dist < nearest_d:
                nearest_i, nearest_d = i, dist
            if kind == KIND_WALL and dist < nearest_wall_d:
                nearest_wall_i, nearest_wall_d = i, dist
        if nearest_i >= 0 and nearest_d < self.separation_px:
            theta = 2.0 * math.pi * nearest_i / n
            return PolicyAction(compass_keys(-math.cos(theta), -math.sin(theta)))
        if nearest_wall_i >= 0:
            # follow the wall: move perpendicular to the wall bearing
            theta = 2.0 * math.pi * nearest_wall_i / n
            return PolicyAction(compass_keys(-math.sin(theta), math.cos(theta)))
        return PolicyAction(frozenset({KEY_UP}))


@dataclass
class IdlePolicy:
    privileged: bool = False

    def act(self, obs: PolicyObservation) -> PolicyAction:
        return PolicyAction(frozenset())


@dataclass
class ConstantKeysPolicy:
    keys: frozenset[str]
    privileged: bool = False

    def act(self, obs: PolicyObservation) -> PolicyAction:
        return PolicyAction(self.keys)


def oracle_policies(config: InstanceConfig, n: int,
                    color_key: str | None = "A") -> list[OraclePolicy]:
    """n oracle bots targeting equally spaced slots on the pattern."""
    slots = perimeter_points(config.formation.pattern, n)
    stop = config.formation.dist_tol / 2.0
    return [OraclePolicy(slot, color_key, stop) for slot in slots]


def policies_by_name(name: str, config: InstanceConfig, n: int) -> list[Any]:
    if name == "oracle":
        return list(oracle_policies(config, n))
    if name == "local":
        sep = 2.0 * config.physics.agent_radius + 4.0
        return [LocalPolicy(sep) for _ in range(n)]
    if name == "idle":
        return [IdlePolicy() for _ in range(n)]
    raise ValueError(f"unknown policy {name!r}")


class _BotClient:
    """Codec-faithful in-process client for one policy."""

    def __init__(self, policy: Any, deliver_tap: Callable[[int | None, str], None] | None):
        self.policy = policy
        self.tap = deliver_tap
        self.binding: Binding | None = None
        self.token: str | None = None
        self.agent_id: int | None = None
        self.scan: tuple[tuple[float, int], ...] | None = None
        self.self_color: int | None = None
        self.overhead: OverheadFrame | None = None
        self.last_sent_keys: frozenset[str] | None = None
        self.denied_colors = 0

    def deliver(self, message: dict[str, Any]) -> None:
        """Server -> bot: encode, tap, decode, consume."""
        text = encode(message)
        if self.tap is not None:
            self.tap(self.agent_id, text)
        frame = parse_server_frame(text)
        kind = frame["type"]
        if kind == "welcome":
            self.token = frame["token"]
            self.agent_id = frame["agent_id"]
        elif kind == "scan":
            self.scan = tuple((float(d), int(k)) for d, k in frame["hits"])
            self.self_color = int(frame["self_color"])
        elif kind == "overhead":
            fov = tuple(float(v) for v in frame["fov"])
            blips = tuple((float(x), float(y), int(c)) for x, y, c in frame["blips"])
            self.overhead = OverheadFrame(int(frame["snapshot_tick"]), fov, blips)
        elif kind == "error" and frame.get("code") == "capability_denied":
            self.denied_colors += 1

    def observe(self, tick: int, self_pos: tuple[float, float] | None) -> PolicyObservation:
        age = None
        if self.overhead is not None:
            age = tick - self.overhead.snapshot_tick
        return PolicyObservation(
            tick=tick,
            self_color=self.self_color,
            scan=self.scan,
            overhead=self.overhead,
            overhead_age_ticks=age,
            self_pos=self_pos if getattr(self.policy, "privileged", False) else None,
        )


def parse_server_frame(text: str) -> dict[str, Any]:
    """Decode a server frame; bots only ever see post-codec data."""
    frame = json.loads(text)
    if not isinstance(frame, dict) or "type" not in frame:
        raise ValueError("malformed server frame")
    return frame


@dataclass
class HeadlessResult:
    engine: InstanceEngine
    log_path: Path | None
    ticks_run: int
    completed: bool
    overhead_captures: int
    doc: LogDocument | None = None


def run_headless(
    config: InstanceConfig,
    policies: Sequence[Any],
    max_ticks: int,
    log_dir: str | Path | None = None,
    token_factory: Callable[[], str] | None = None,
    frame_tap: Callable[[int | None, str], None] | None = None,
    registry: IdentityRegistry | None = None,
) -> HeadlessResult:
    """Drive a full instance with bots on virtual time.

    Stops at completion, abort, or max_ticks (which aborts). Returns the
    engine, the sealed log (when log_dir is given) and run counters.
    """
    if registry is None:
        counter = itertools.count()
        factory = token_factory or (lambda: f"bot-{next(counter):04d}")
        registry = IdentityRegistry(token_factory=factory)
    engine = InstanceEngine(config, registry, log_dir)

    bots: list[_BotClient] = []
    config_echo = config_to_dict(config)
    for policy in policies:
        bot = _BotClient(policy, frame_tap)
        hello = parse_client_message(encode({"type": "hello", "token": None}))
        identity = registry.hello(hello["token"])
        binding = engine.connect(identity)
        bot.binding = binding
        bot.deliver(welcome_frame(identity.token, binding.agent_id, binding.role,
                                  engine.phase.value, config_echo))
        bots.append(bot)

    def broadcast(messages: list[dict]) -> None:
        for msg in messages:
            for bot in bots:
                bot.deliver(msg)

    broadcast(engine.start())

    overhead_captures = 0
    ticks_run = 0
    while engine.phase is InstancePhase.RUNNING and ticks_run < max_ticks:
        out = engine.tick_once()
        ticks_run = out.tick
        if out.overhead is not None:
            overhead_captures += 1
        positions = {a.agent_id: (a.x, a.y) for a in out.world.agents}
        for bot in bots:
            if bot.agent_id in out.scans:
                bot.deliver(scan_message(out.scans[bot.agent_id]))
            if out.overhead is not None:
                bot.deliver(overhead_message(out.overhead))
        broadcast(out.events)
        if engine.phase is not InstancePhase.RUNNING:
            break
        for bot in bots:
            if bot.agent_id is None:
                continue
            obs = bot.observe(out.tick, positions.get(bot.agent_id))
            try:
                action = bot.policy.act(obs)
            except Exception as exc:  # a broken policy must not wedge the run
                broadcast(engine.abort(f"policy_error: {exc}"))
                break
            keys = frozenset(action.keys)
            if keys != bot.last_sent_keys:
                parsed = parse_client_message(
                    encode({"type": "input", "keys": sorted(keys)}))
                engine.queue_input(bot.agent_id, parsed["keys"])
                bot.last_sent_keys = keys
            if action.color_key is not None:
                parsed = parse_client_message(
                    encode({"type": "color", "key": action.color_key}))
                try:
                    engine.queue_color(bot.agent_id, COLOR_KEYS[parsed["key"]])
                except CapabilityDenied as exc:
                    bot.deliver(error_frame("capability_denied", str(exc)))
    if engine.phase is InstancePhase.RUNNING:
        broadcast(engine.abort("max_ticks"))

    doc = None
    if engine.log_path is not None:
        doc = read_log(engine.log_path, strict=True)
    return HeadlessResult(
        engine=engine,
        log_path=engine.log_path,
        ticks_run=ticks_run,
        completed=engine.phase is InstancePhase.COMPLETE,
        overhead_captures=overhead_captures,
        doc=doc,
    )
