"""Instance configuration: parsing, validation and normalized echo.

The on-disk format is a single JSON document; see docs/config.md for the
schema and defaults. Validation gathers every violated constraint so an
admin rejection can list them all at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .formation import (
    CirclePerimeter,
    FormationSpec,
    Pattern,
    RectanglePerimeter,
    SegmentChain,
    pattern_perimeter,
)
from .model import Arena, PhysicsParams
from .sensing import SensingParams


@dataclass(frozen=True)
class Capabilities:
    local_sensing: bool = True
    global_sensing: bool = True
    color_switching: bool = True


@dataclass(frozen=True)
class UniformRandomPlacement:
    seed: int = 0


@dataclass(frozen=True)
class ExplicitPlacement:
    # Each entry: (x, y, color index)
    agents: tuple[tuple[float, float, int], ...]


Placement = UniformRandomPlacement | ExplicitPlacement


@dataclass(frozen=True)
class InstanceConfig:
    instance_id: str
    arena: Arena
    physics: PhysicsParams
    sensing: SensingParams
    formation: FormationSpec
    capabilities: Capabilities
    max_players: int
    placement: Placement

    @property
    def capacity(self) -> int:
        if isinstance(self.placement, ExplicitPlacement):
            return min(self.max_players, len(self.placement.agents))
        return self.max_players

    @property
    def placement_seed(self) -> int | None:
        if isinstance(self.placement, UniformRandomPlacement):
            return self.placement.seed
        return None


def _parse_pattern(doc: dict, problems: list[str]) -> Pattern | None:
    kind = doc.get("kind")
    try:
        if kind == "rectangle":
            return RectanglePerimeter(
                (float(doc["center"][0]), float(doc["center"][1])),
                float(doc["width"]),
                float(doc["height"]),
            )
        if kind == "circle":
            return CirclePerimeter(
                (float(doc["center"][0]), float(doc["center"][1])), float(doc["radius"])
            )
        if kind == "chain":
            return SegmentChain(tuple((float(x), float(y)) for x, y in doc["points"]))
    except (KeyError, TypeError, ValueError, IndexError):
        problems.append(f"pattern: malformed {kind!r} definition")
        return None
    problems.append(f"pattern: unknown kind {kind!r}")
    return None


def config_from_dict(doc: dict, default_instance_id: str = "instance-0") -> InstanceConfig:
    """Build and validate an InstanceConfig from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError(["config document must be a JSON object"])
    problems: list[str] = []

    instance_id = str(doc.get("instance_id", default_instance_id))

    arena_doc = doc.get("arena", {})
    width = float(arena_doc.get("width", 1200.0))
    height = float(arena_doc.get("height", 800.0))
    if width <= 0 or height <= 0:
        problems.append("arena: width and height must be positive")

    phys_doc = doc.get("physics", {})
    speed = float(phys_doc.get("speed", 18.0))
    radius = float(phys_doc.get("agent_radius", 10.0))
    tick_rate = int(phys_doc.get("tick_rate", 10))
    eps = float(phys_doc.get("epsilon_contact", 1e-6))
    if speed <= 0:
        problems.append("physics: speed must be positive")
    if radius <= 0:
        problems.append("physics: agent_radius must be positive")
    if tick_rate <= 0:
        problems.append("physics: tick_rate must be positive")
    elif 1000 % tick_rate != 0:
        problems.append("physics: tick_rate must divide 1000 ms evenly")
    if speed > 0 and tick_rate > 0 and radius > 0 and speed / tick_rate >= radius:
        problems.append("physics: per-tick travel (speed/tick_rate) must stay below agent_radius")

    sens_doc = doc.get("sensing", {})
    scan_range = float(sens_doc.get("scan_range", 150.0))
    n_rays = int(sens_doc.get("n_rays", 360))
    overhead_rate = float(sens_doc.get("overhead_rate", 1.0))
    fov_doc = sens_doc.get("fov")
    fov: tuple[float, float, float, float] | None
    if fov_doc is None:
        fov = (0.1 * width, 0.1 * height, 0.8 * width, 0.8 * height)
    else:
        fov = (float(fov_doc[0]), float(fov_doc[1]), float(fov_doc[2]), float(fov_doc[3]))
    if scan_range <= radius:
        problems.append("sensing: scan_range must exceed agent_radius")
    if n_rays < 8:
        problems.append("sensing: n_rays must be at least 8")
    if not (0.0 < overhead_rate <= tick_rate):
        problems.append("sensing: overhead_rate must be in (0, tick_rate]")
    if fov is not None:
        fx, fy, fw, fh = fov
        if fw <= 0 or fh <= 0 or fx < 0 or fy < 0 or fx + fw > width or fy + fh > height:
            problems.append("sensing: fov must be a positive rectangle inside the arena")

    form_doc = doc.get("formation", {})
    pattern_doc = form_doc.get(
        "pattern",
        {"kind": "rectangle", "center": [width / 2, height / 2],
         "width": 0.5 * width, "height": 0.5 * height},
    )
    pattern = _parse_pattern(pattern_doc, problems)
    dist_tol = float(form_doc.get("dist_tol", 20.0))
    max_gap_factor = float(form_doc.get("max_gap_factor", 2.0))
    require_consensus = bool(form_doc.get("require_color_consensus", False))
    hold_ms = int(form_doc.get("hold_ms", 3000))
    if dist_tol <= 0:
        problems.append("formation: dist_tol must be positive")
    if max_gap_factor <= 0:
        problems.append("formation: max_gap_factor must be positive")
    if hold_ms < 0:
        problems.append("formation: hold_ms must be non-negative")
    if pattern is not None and not pattern_perimeter(pattern) > 0:
        problems.append("formation: pattern perimeter must be positive")

    caps_doc = doc.get("capabilities", {})
    caps = Capabilities(
        local_sensing=bool(caps_doc.get("local_sensing", True)),
        global_sensing=bool(caps_doc.get("global_sensing", True)),
        color_switching=bool(caps_doc.get("color_switching", True)),
    )
    if not (caps.local_sensing or caps.global_sensing):
        problems.append("capabilities: at least one of local_sensing/global_sensing must be enabled")

    max_players = int(doc.get("max_players", 25))
    if max_players < 1:
        problems.append("max_players must be at least 1")

    place_doc = doc.get("placement", {"kind": "uniform_random", "seed": 0})
    placement: Placement | None = None
    pkind = place_doc.get("kind")
    if pkind == "uniform_random":
        placement = UniformRandomPlacement(int(place_doc.get("seed", 0)))
    elif pkind == "explicit":
        try:
            entries = []
            for entry in place_doc["agents"]:
                x, y = float(entry[0]), float(entry[1])
                color = int(entry[2]) if len(entry) > 2 else 0
                entries.append((x, y, color))
            placement = ExplicitPlacement(tuple(entries))
        except (KeyError, TypeError, ValueError, IndexError):
            placement = None
            problems.append("placement: malformed explicit agent list")
        if placement is not None:
            for i, (x, y, color) in enumerate(placement.agents):
                if not (radius <= x <= width - radius and radius <= y <= height - radius):
                    problems.append(f"placement: agent {i} lies outside the walls")
                if color not in (0, 1, 2):
                    problems.append(f"placement: agent {i} has invalid color {color}")
            for i in range(len(placement.agents)):
                for j in range(i + 1, len(placement.agents)):
                    a, b = placement.agents[i], placement.agents[j]
                    if math.hypot(b[0] - a[0], b[1] - a[1]) < 2 * radius - eps:
                        problems.append(f"placement: agents {i} and {j} overlap")
    else:
        problems.append(f"placement: unknown kind {pkind!r}")

    if problems:
        raise ConfigError(problems)

    assert pattern is not None and placement is not None
    return InstanceConfig(
        instance_id=instance_id,
        arena=Arena(width, height),
        physics=PhysicsParams(speed, radius, tick_rate, eps),
        sensing=SensingParams(scan_range, n_rays, overhead_rate, fov),
        formation=FormationSpec(pattern, dist_tol, max_gap_factor, require_consensus, hold_ms),
        capabilities=caps,
        max_players=max_players,
        placement=placement,
    )


def _pattern_to_dict(pattern: Pattern) -> dict:
    if isinstance(pattern, RectanglePerimeter):
        return {
            "kind": "rectangle",
            "center": [pattern.center[0], pattern.center[1]],
            "width": pattern.width,
            "height": pattern.height,
        }
    if isinstance(pattern, CirclePerimeter):
        return {"kind": "circle", "center": [pattern.center[0], pattern.center[1]],
                "radius": pattern.radius}
    return {"kind": "chain", "points": [[x, y] for x, y in pattern.points]}


def config_to_dict(cfg: InstanceConfig) -> dict:
    """Normalized JSON-ready echo of a validated config."""
    if isinstance(cfg.placement, UniformRandomPlacement):
        placement: dict = {"kind": "uniform_random", "seed": cfg.placement.seed}
    else:
        placement = {"kind": "explicit", "agents": [[x, y, c] for x, y, c in cfg.placement.agents]}
    return {
        "instance_id": cfg.instance_id,
        "arena": {"width": cfg.arena.width, "height": cfg.arena.height},
        "physics": {
            "speed": cfg.physics.speed,
            "agent_radius": cfg.physics.agent_radius,
            "tick_rate": cfg.physics.tick_rate,
            "epsilon_contact": cfg.physics.epsilon_contact,
        },
        "sensing": {
            "scan_range": cfg.sensing.scan_range,
            "n_rays": cfg.sensing.n_rays,
            "overhead_rate": cfg.sensing.overhead_rate,
            "fov": list(cfg.sensing.fov_rect(cfg.arena.width, cfg.arena.height)),
        },
        "formation": {
            "pattern": _pattern_to_dict(cfg.formation.pattern),
            "dist_tol": cfg.formation.dist_tol,
            "max_gap_factor": cfg.formation.max_gap_factor,
            "require_color_consensus": cfg.formation.require_color_consensus,
            "hold_ms": cfg.formation.hold_ms,
        },
        "capabilities": {
            "local_sensing": cfg.capabilities.local_sensing,
            "global_sensing": cfg.capabilities.global_sensing,
            "color_switching": cfg.capabilities.color_switching,
        },
        "max_players": cfg.max_players,
        "placement": placement,
    }
