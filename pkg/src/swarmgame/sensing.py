"""The two observation products: occluded local range scans and the
rate-limited partial overhead snapshot.

Bearings start at 0 along +x and increase clockwise on screen (which,
with +y pointing south, means bearing k of n is simply 2*pi*k/n in
standard (cos, sin) form). Everything here is a pure function over an
immutable world snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityDenied, ContractViolation
from .model import AgentColor, WorldState

KIND_NONE = 0
KIND_WALL = 1


def kind_for_color(color: AgentColor) -> int:
    return 2 + int(color)


@dataclass(frozen=True)
class SensingParams:
    scan_range: float = 150.0
    n_rays: int = 360
    overhead_rate: float = 1.0   # Hz; 0.2 for the slow-update variant
    fov: tuple[float, float, float, float] | None = None  # (x, y, w, h); None = centered 80%

    def fov_rect(self, arena_width: float, arena_height: float) -> tuple[float, float, float, float]:
        if self.fov is not None:
            return self.fov
        return (0.1 * arena_width, 0.1 * arena_height, 0.8 * arena_width, 0.8 * arena_height)


@dataclass(frozen=True)
class RayHit:
    bearing_index: int
    distance: float
    kind: int  # KIND_NONE, KIND_WALL, or 2 + color


@dataclass(frozen=True)
class ScanFrame:
    observer_agent_id: int
    tick: int
    hits: tuple[RayHit, ...]
    self_color: AgentColor


@dataclass(frozen=True)
class OverheadFrame:
    snapshot_tick: int
    fov: tuple[float, float, float, float]
    blips: tuple[tuple[float, float, int], ...]


def _ray_kernel(
    world: WorldState,
    observer_id: int | None,
    origin: tuple[float, float],
    bearings: np.ndarray,
    params: SensingParams,
    radius: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest obstruction along each bearing: (distances, kind codes).

    Obstacles are the four arena walls and every agent other than the
    observer, modeled as opaque discs. Results are capped at scan_range;
    a capped ray reports KIND_NONE. Walls win exact-distance ties.
    """
    ox, oy = origin
    arena = world.arena
    if not (0.0 <= ox <= arena.width and 0.0 <= oy <= arena.height):
        raise ContractViolation("scan origin must lie inside the arena")

    scan_range = params.scan_range
    dir_x = np.cos(bearings)
    dir_y = np.sin(bearings)

    # Wall distance: nearest positive plane crossing among x=0, x=W, y=0, y=H.
    wall_t = np.full(bearings.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        for delta, comp in (
            (0.0 - ox, dir_x),
            (arena.width - ox, dir_x),
            (0.0 - oy, dir_y),
            (arena.height - oy, dir_y),
        ):
            t = np.where(comp != 0.0, delta / comp, np.inf)
            t = np.where(t >= 0.0, t, np.inf)
            wall_t = np.minimum(wall_t, t)

    # Agent discs: nearest positive ray-circle root, lowest agent_id wins ties.
    agent_t = np.full(bearings.shape, np.inf)
    agent_color = np.full(bearings.shape, -1, dtype=np.int64)
    r_sq = radius * radius
    for agent in world.agents:
        if observer_id is not None and agent.agent_id == observer_id:
            continue
        bx = agent.x - ox
        by = agent.y - oy
        center_d_sq = bx * bx + by * by
        if center_d_sq > (scan_range + radius) ** 2:
            continue
        proj = dir_x * bx + dir_y * by
        disc = r_sq - (center_d_sq - proj * proj)
        hit = disc >= 0.0
        root = np.sqrt(np.where(hit, disc, 0.0))
        # Near root, clamped to 0 for rays that start inside the disc.
        t = np.maximum(proj - root, 0.0)
        better = hit & (proj + root >= 0.0) & (t < agent_t)
        agent_t = np.where(better, t, agent_t)
        agent_color = np.where(better, int(agent.color), agent_color)

    distances = np.minimum(np.minimum(wall_t, agent_t), scan_range)
    kinds = np.full(bearings.shape, KIND_NONE, dtype=np.int64)
    in_range = distances < scan_range
    wall_hit = in_range & (wall_t <= agent_t)
    agent_hit = in_range & ~wall_hit
    kinds[wall_hit] = KIND_WALL
    kinds[agent_hit] = 2 + agent_color[agent_hit]
    return distances, kinds


def cast_ray(
    world: WorldState,
    origin: tuple[float, float],
    bearing: float,
    params: SensingParams,
    radius: float,
    observer_id: int | None = None,
) -> tuple[float, int]:
    """Distance and kind of the nearest obstruction along one bearing."""
    bearings = np.asarray([bearing], dtype=np.float64)
    distances, kinds = _ray_kernel(world, observer_id, origin, bearings, params, radius)
    return float(distances[0]), int(kinds[0])


def scan_bearings(n_rays: int) -> np.ndarray:
    return np.arange(n_rays, dtype=np.float64) * (2.0 * np.pi) / n_rays


def neighborhood_scan(
    world: WorldState,
    agent_id: int,
    params: SensingParams,
    radius: float,
    enabled: bool = True,
) -> ScanFrame:
    """Full n_rays occluded scan from one agent's center."""
    if not enabled:
        raise CapabilityDenied("local sensing is disabled for this instance")
    agent = next((a for a in world.agents if a.agent_id == agent_id), None)
    if agent is None:
        raise ContractViolation(f"no agent with id {agent_id}")
    distances, kinds = _ray_kernel(
        world, agent_id, (agent.x, agent.y), scan_bearings(params.n_rays), params, radius
    )
    hits = tuple(
        RayHit(k, float(distances[k]), int(kinds[k])) for k in range(params.n_rays)
    )
    return ScanFrame(agent_id, world.tick, hits, agent.color)


def overhead_snapshot(
    world: WorldState, params: SensingParams, enabled: bool = True
) -> OverheadFrame:
    """Anonymous blips for every agent whose center lies inside the FOV."""
    if not enabled:
        raise CapabilityDenied("global sensing is disabled for this instance")
    fx, fy, fw, fh = params.fov_rect(world.arena.width, world.arena.height)
    blips = tuple(
        (a.x, a.y, int(a.color))
        for a in world.agents
        if fx <= a.x <= fx + fw and fy <= a.y <= fy + fh
    )
    return OverheadFrame(world.tick, (fx, fy, fw, fh), blips)


def overhead_due(tick: int, last_snapshot_tick: int, params: SensingParams, tick_rate: int) -> bool:
    """True when enough ticks have passed for the next overhead capture."""
    return (tick - last_snapshot_tick) >= tick_rate / params.overhead_rate
