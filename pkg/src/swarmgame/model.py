"""Arena geometry, agent kinematics and deterministic collision resolution.

Coordinates are screen pixels: origin at the arena's top-left corner,
+x east, +y south. All simulation state lives here; every other module
consumes immutable snapshots of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

from .errors import ContractViolation, PhysicsFault

KEY_UP = "Up"
KEY_DOWN = "Down"
KEY_LEFT = "Left"
KEY_RIGHT = "Right"
MOTION_KEYS = (KEY_UP, KEY_DOWN, KEY_LEFT, KEY_RIGHT)

# Fixed tie-break rank for key sets (prefix-first tuple comparison).
KEY_ORDER = {KEY_UP: 0, KEY_DOWN: 1, KEY_LEFT: 2, KEY_RIGHT: 3}

_DIAG = math.sqrt(0.5)

# Maximum clamp+push sweeps per tick before declaring the arena over-packed.
# Wall-pinned crowds contract slowly (a 26-agent corner pile needs ~850
# sweeps to settle), so the budget is generous; genuinely infeasible
# packings never contract and still hit the cap.
RESOLVE_MAX_ITERATIONS = 4096

# Sweeps keep going until pair separations are within this of exact contact.
# Much tighter than epsilon_contact so the settled state tracks the converged
# projection fixed point, yet loose enough that float dust cannot stall it.
RESOLVE_SETTLE_TOL = 1e-9


class AgentColor(IntEnum):
    """The three switchable agent colors, bound to keys A, S, D."""

    C1 = 0
    C2 = 1
    C3 = 2


COLOR_KEYS = {"A": AgentColor.C1, "S": AgentColor.C2, "D": AgentColor.C3}


@dataclass(frozen=True)
class Arena:
    """Axis-aligned rectangular workspace bounded by solid walls."""

    width: float
    height: float

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ContractViolation("arena dimensions must be positive")


@dataclass(frozen=True)
class PhysicsParams:
    speed: float = 18.0          # px/s
    agent_radius: float = 10.0   # px
    tick_rate: int = 10          # Hz
    epsilon_contact: float = 1e-6

    def __post_init__(self) -> None:
        if self.speed <= 0 or self.agent_radius <= 0 or self.tick_rate <= 0:
            raise ContractViolation("physics parameters must be positive")
        if self.speed / self.tick_rate >= self.agent_radius:
            # One tick of travel must stay below a contact radius or agents
            # could tunnel through each other between resolutions.
            raise ContractViolation("per-tick travel must stay below agent_radius")

    @property
    def step(self) -> float:
        """Distance covered in one tick when moving."""
        return self.speed / self.tick_rate

    @property
    def tick_period_ms(self) -> int:
        return 1000 // self.tick_rate


@dataclass
class AgentState:
    agent_id: int
    x: float
    y: float
    color: AgentColor = AgentColor.C1
    intent: frozenset[str] = field(default_factory=frozenset)
    player_token_hash: str = ""

    def pos(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass
class WorldState:
    arena: Arena
    agents: list[AgentState]
    tick: int = 0

    def copy(self) -> "WorldState":
        return WorldState(self.arena, [replace(a) for a in self.agents], self.tick)


def tick_to_ms(tick: int, tick_rate: int) -> int:
    return tick * (1000 // tick_rate)


def direction_from_intent(intent: frozenset[str]) -> tuple[float, float] | None:
    """Map a pressed-key set to one of the 8 compass unit vectors.

    Opposing keys cancel per axis; an empty or fully cancelled set yields
    None. Diagonals are normalized so speed is direction-independent.
    """
    dx = (KEY_RIGHT in intent) - (KEY_LEFT in intent)
    dy = (KEY_DOWN in intent) - (KEY_UP in intent)
    if dx == 0 and dy == 0:
        return None
    if dx == 0:
        return (0.0, float(dy))
    if dy == 0:
        return (float(dx), 0.0)
    return (dx * _DIAG, dy * _DIAG)


def integrate_agent(
    pos: tuple[float, float],
    direction: tuple[float, float] | None,
    params: PhysicsParams,
) -> tuple[float, float]:
    """Advance one position by one tick of travel along a unit direction."""
    if direction is None:
        return pos
    norm = math.hypot(direction[0], direction[1])
    if abs(norm - 1.0) >= 1e-9:
        raise ContractViolation(f"direction must be unit length, got |d|={norm!r}")
    step = params.step
    return (pos[0] + direction[0] * step, pos[1] + direction[1] * step)


def _clamp_all(xs: list[float], ys: list[float], arena: Arena, r: float) -> bool:
    moved = False
    lo_x, hi_x = r, arena.width - r
    lo_y, hi_y = r, arena.height - r
    for i in range(len(xs)):
        x, y = xs[i], ys[i]
        cx = lo_x if x < lo_x else (hi_x if x > hi_x else x)
        cy = lo_y if y < lo_y else (hi_y if y > hi_y else y)
        if cx != x or cy != y:
            xs[i], ys[i] = cx, cy
            moved = True
    return moved


def _push_pairs(xs: list[float], ys: list[float], r: float, eps: float) -> bool:
    """One sweep over all pairs in ascending (i, j) order, separating overlaps.

    Both agents move equally along the center line until separation is
    exactly 2r; coincident centers separate along +x.
    """
    n = len(xs)
    min_sep = 2.0 * r
    threshold = min_sep - eps
    pushed = False
    for i in range(n - 1):
        xi, yi = xs[i], ys[i]
        for j in range(i + 1, n):
            dx = xs[j] - xi
            dy = ys[j] - yi
            d = math.hypot(dx, dy)
            if d >= threshold:
                continue
            if d < 1e-12:
                nx, ny = 1.0, 0.0
                shift = r
            else:
                nx, ny = dx / d, dy / d
                shift = (min_sep - d) * 0.5
            xi -= nx * shift
            yi -= ny * shift
            xs[j] += nx * shift
            ys[j] += ny * shift
            pushed = True
        xs[i], ys[i] = xi, yi
    return pushed


# Crowds this size resolve noticeably faster with vectorized overlap
# detection; below it the plain pair scan wins on constant factors.
_VECTOR_SWEEP_MIN_AGENTS = 10

_triu_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    pairs = _triu_cache.get(n)
    if pairs is None:
        pairs = np.triu_indices(n, k=1)
        _triu_cache[n] = pairs
    return pairs


def _push_candidates(xs: list[float], ys: list[float], r: float, eps: float) -> bool:
    """Sweep equivalent of _push_pairs for larger crowds.

    Overlap candidates are found in one vectorized pass over the positions
    at sweep start, then pushed sequentially in the same ascending (i, j)
    order with the same per-pair arithmetic. A pair driven into overlap by
    pushes later in the sweep is picked up at the next sweep's detection
    pass, so the loop still exits only on a sweep that finds nothing.
    """
    min_sep = 2.0 * r
    threshold = min_sep - eps
    ax = np.asarray(xs)
    ay = np.asarray(ys)
    iu, ju = _triu_pairs(len(xs))
    du = ax[ju] - ax[iu]
    dv = ay[ju] - ay[iu]
    near = du * du + dv * dv < threshold * threshold
    pushed = False
    for i, j in zip(iu[near].tolist(), ju[near].tolist()):
        dx = xs[j] - xs[i]
        dy = ys[j] - ys[i]
        d = math.hypot(dx, dy)
        if d >= threshold:
            continue
        if d < 1e-12:
            nx, ny = 1.0, 0.0
            shift = r
        else:
            nx, ny = dx / d, dy / d
            shift = (min_sep - d) * 0.5
        xs[i] -= nx * shift
        ys[i] -= ny * shift
        xs[j] += nx * shift
        ys[j] += ny * shift
        pushed = True
    return pushed


def resolve_world(world: WorldState, params: PhysicsParams) -> WorldState:
    """Advance the world one tick: integrate intents, then restore invariants.

    Wall clamping and equal-push pairwise separation repeat until both the
    containment and no-overlap invariants hold. Fully deterministic for a
    given input. Raises PhysicsFault if the projection loop cannot settle
    within RESOLVE_MAX_ITERATIONS sweeps (over-packed arena).
    """
    r = params.agent_radius
    xs: list[float] = []
    ys: list[float] = []
    for agent in world.agents:
        p = integrate_agent((agent.x, agent.y), direction_from_intent(agent.intent), params)
        xs.append(p[0])
        ys.append(p[1])

    sweep = _push_candidates if len(xs) >= _VECTOR_SWEEP_MIN_AGENTS else _push_pairs
    settled = False
    for _ in range(RESOLVE_MAX_ITERATIONS):
        _clamp_all(xs, ys, world.arena, r)
        if not sweep(xs, ys, r, RESOLVE_SETTLE_TOL):
            settled = True
            break
    if not settled:
        # Cap exhausted mid-sweep: the last push pass may sit a hair outside
        # a wall, so clamp once more, then fault only if the state really
        # violates the contact tolerance.
        _clamp_all(xs, ys, world.arena, r)
        if _violates_invariants(xs, ys, world.arena, r, params.epsilon_contact):
            raise PhysicsFault(
                f"collision resolution did not converge in {RESOLVE_MAX_ITERATIONS} sweeps"
            )

    agents = [
        replace(agent, x=xs[i], y=ys[i], intent=agent.intent)
        for i, agent in enumerate(world.agents)
    ]
    return WorldState(world.arena, agents, world.tick + 1)


def _violates_invariants(
    xs: list[float], ys: list[float], arena: Arena, r: float, eps: float
) -> bool:
    n = len(xs)
    for i in range(n):
        if not (r <= xs[i] <= arena.width - r and r <= ys[i] <= arena.height - r):
            return True
    threshold = 2.0 * r - eps
    for i in range(n - 1):
        for j in range(i + 1, n):
            if math.hypot(xs[j] - xs[i], ys[j] - ys[i]) < threshold:
                return True
    return False
