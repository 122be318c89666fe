"""Formation objectives: target patterns, completion detection, metrics.

A formation counts as achieved when every agent sits within a distance
band of the target curve AND the agents cover the curve without a large
arc-length gap; optionally all agents must also display the same color.
The condition must then hold continuously for a debounce window before
the objective latches complete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ParseError, SpecInfeasible
from .model import WorldState


@dataclass(frozen=True)
class RectanglePerimeter:
    center: tuple[float, float]
    width: float
    height: float

    def segments(self) -> tuple[tuple[tuple[float, float], tuple[float, float]], ...]:
        cx, cy = self.center
        hw, hh = self.width / 2.0, self.height / 2.0
        tl = (cx - hw, cy - hh)
        tr = (cx + hw, cy - hh)
        br = (cx + hw, cy + hh)
        bl = (cx - hw, cy + hh)
        # Clockwise from the top-left corner; arc length starts there.
        return ((tl, tr), (tr, br), (br, bl), (bl, tl))


@dataclass(frozen=True)
class CirclePerimeter:
    center: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class SegmentChain:
    points: tuple[tuple[float, float], ...]

    def segments(self) -> tuple[tuple[tuple[float, float], tuple[float, float]], ...]:
        return tuple(
            (self.points[i], self.points[i + 1]) for i in range(len(self.points) - 1)
        )


Pattern = RectanglePerimeter | CirclePerimeter | SegmentChain


@dataclass(frozen=True)
class FormationSpec:
    pattern: Pattern
    dist_tol: float = 20.0
    max_gap_factor: float = 2.0
    require_color_consensus: bool = False
    hold_ms: int = 3000


@dataclass(frozen=True)
class CompletionStatus:
    satisfied_now: bool = False
    satisfied_since_ms: int | None = None
    complete: bool = False
    residual: float = math.inf
    consensus: bool = False


def pattern_perimeter(pattern: Pattern) -> float:
    if isinstance(pattern, CirclePerimeter):
        return 2.0 * math.pi * pattern.radius
    return sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in pattern.segments())


def _project_to_segment(
    p: tuple[float, float],
    a: tuple[float, float],
    b: tuple[float, float],
) -> tuple[float, float]:
    """(distance, distance-along-segment) of the nearest point on segment ab."""
    ax, ay = a
    vx, vy = b[0] - ax, b[1] - ay
    seg_len_sq = vx * vx + vy * vy
    if seg_len_sq == 0.0:
        return math.hypot(p[0] - ax, p[1] - ay), 0.0
    t = ((p[0] - ax) * vx + (p[1] - ay) * vy) / seg_len_sq
    t = min(1.0, max(0.0, t))
    qx, qy = ax + t * vx, ay + t * vy
    return math.hypot(p[0] - qx, p[1] - qy), t * math.sqrt(seg_len_sq)


def _project(p: tuple[float, float], pattern: Pattern) -> tuple[float, float]:
    """(distance to curve, arc-length coordinate of the nearest point)."""
    if isinstance(pattern, CirclePerimeter):
        cx, cy = pattern.center
        dx, dy = p[0] - cx, p[1] - cy
        d = math.hypot(dx, dy)
        angle = math.atan2(dy, dx) % (2.0 * math.pi)
        return abs(d - pattern.radius), angle * pattern.radius
    best_d = math.inf
    best_s = 0.0
    offset = 0.0
    for a, b in pattern.segments():
        d, along = _project_to_segment(p, a, b)
        if d < best_d:
            best_d = d
            best_s = offset + along
        offset += math.hypot(b[0] - a[0], b[1] - a[1])
    return best_d, best_s


def distance_to_pattern(p: tuple[float, float], pattern: Pattern) -> float:
    """Euclidean distance from a point to the nearest point of the curve."""
    return _project(p, pattern)[0]


def perimeter_point(pattern: Pattern, s: float) -> tuple[float, float]:
    """Point at arc-length s along the pattern (s taken modulo perimeter)."""
    total = pattern_perimeter(pattern)
    s = s % total
    if isinstance(pattern, CirclePerimeter):
        angle = s / pattern.radius
        cx, cy = pattern.center
        return (cx + pattern.radius * math.cos(angle), cy + pattern.radius * math.sin(angle))
    for a, b in pattern.segments():
        seg_len = math.hypot(b[0] - a[0], b[1] - a[1])
        if s <= seg_len or seg_len == 0.0:
            if seg_len == 0.0:
                return a
            t = s / seg_len
            return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        s -= seg_len
    return pattern.segments()[-1][1]


def perimeter_points(pattern: Pattern, n: int, offset: float = 0.0) -> list[tuple[float, float]]:
    """n equally spaced points along the pattern, starting at arc offset."""
    total = pattern_perimeter(pattern)
    return [perimeter_point(pattern, offset + k * total / n) for k in range(n)]


def check_formation(world: WorldState, spec: FormationSpec) -> tuple[bool, float]:
    """Geometric completion test: distance band plus arc-coverage gap bound.

    Returns (condition, residual) where residual is the largest agent
    distance to the pattern regardless of the verdict.
    """
    n = len(world.agents)
    if n < 3:
        raise SpecInfeasible(f"formation check needs at least 3 agents, got {n}")
    distances = []
    projections = []
    for agent in world.agents:
        d, s = _project((agent.x, agent.y), spec.pattern)
        distances.append(d)
        projections.append(s)
    residual = max(distances)
    within_band = residual <= spec.dist_tol

    total = pattern_perimeter(spec.pattern)
    ss = sorted(projections)
    max_gap = total - ss[-1] + ss[0]
    for i in range(len(ss) - 1):
        gap = ss[i + 1] - ss[i]
        if gap > max_gap:
            max_gap = gap
    covered = max_gap <= spec.max_gap_factor * total / n
    return within_band and covered, residual


def check_consensus(world: WorldState) -> bool:
    """True when every agent displays the same color."""
    if not world.agents:
        raise SpecInfeasible("consensus is undefined for an empty world")
    first = world.agents[0].color
    return all(a.color == first for a in world.agents)


def update_completion(
    status: CompletionStatus,
    world: WorldState,
    spec: FormationSpec,
    t_ms: int,
) -> CompletionStatus:
    """Advance the debounced completion state by one tick.

    Completion latches: once complete, the status never reverts.
    """
    if status.complete:
        return status
    formed, residual = check_formation(world, spec)
    consensus = check_consensus(world)
    satisfied = formed and (not spec.require_color_consensus or consensus)
    if not satisfied:
        return CompletionStatus(False, None, False, residual, consensus)
    since = status.satisfied_since_ms if status.satisfied_now else t_ms
    complete = t_ms - since >= spec.hold_ms
    return CompletionStatus(True, since, complete, residual, consensus)


def task_duration_ms(records: list[dict]) -> int | None:
    """Milliseconds from instance start to objective completion.

    None marks an incomplete run. Raises ParseError when the record
    stream lacks an instance_start event.
    """
    start = None
    complete = None
    for rec in records:
        kind = rec.get("kind")
        if kind == "instance_start" and start is None:
            start = rec["t_ms"]
        elif kind == "objective_complete" and complete is None:
            complete = rec["t_ms"]
    if start is None:
        raise ParseError("log has no instance_start record")
    if complete is None:
        return None
    return complete - start
