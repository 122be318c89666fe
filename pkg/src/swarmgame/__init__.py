"""Networked multiplayer coordination-game platform.

An authoritative fixed-step game server for swarm-style formation
tasks: players steer colored discs in a walled arena under constrained,
robot-like perception (occluded local range scans plus a rate-limited
partial overhead view), with per-instance capability toggles, an
automatic formation-objective detector, 10 Hz trajectory logging with
deterministic replay, and a scripted-bot harness for headless runs.
"""

__version__ = "0.1.0"

from .config import (
    Capabilities,
    ExplicitPlacement,
    InstanceConfig,
    UniformRandomPlacement,
    config_from_dict,
    config_to_dict,
)
from .engine import (
    IdentityRegistry,
    InstanceEngine,
    InstancePhase,
    PlayerIdentity,
    place_agents,
)
from .errors import (
    CapabilityDenied,
    ConfigError,
    ContractViolation,
    DivergenceError,
    ParseError,
    PhaseConflict,
    PhysicsFault,
    ProtocolError,
    SpecInfeasible,
    SwarmError,
)
from .formation import (
    CirclePerimeter,
    CompletionStatus,
    FormationSpec,
    RectanglePerimeter,
    SegmentChain,
    check_consensus,
    check_formation,
    distance_to_pattern,
    task_duration_ms,
    update_completion,
)
from .model import (
    AgentColor,
    AgentState,
    Arena,
    PhysicsParams,
    WorldState,
    direction_from_intent,
    resolve_world,
)
from .replay import MetricsReport, metrics, replay
from .sensing import (
    OverheadFrame,
    RayHit,
    ScanFrame,
    SensingParams,
    cast_ray,
    neighborhood_scan,
    overhead_snapshot,
)
from .sessionlog import LogDocument, SessionLogWriter, read_log

__all__ = [
    "__version__",
    "AgentColor", "AgentState", "Arena", "PhysicsParams", "WorldState",
    "direction_from_intent", "resolve_world",
    "SensingParams", "RayHit", "ScanFrame", "OverheadFrame",
    "cast_ray", "neighborhood_scan", "overhead_snapshot",
    "FormationSpec", "CompletionStatus", "RectanglePerimeter",
    "CirclePerimeter", "SegmentChain", "check_formation", "check_consensus",
    "update_completion", "distance_to_pattern", "task_duration_ms",
    "Capabilities", "InstanceConfig", "UniformRandomPlacement",
    "ExplicitPlacement", "config_from_dict", "config_to_dict",
    "IdentityRegistry", "InstanceEngine", "InstancePhase", "PlayerIdentity",
    "place_agents",
    "SessionLogWriter", "LogDocument", "read_log",
    "replay", "metrics", "MetricsReport",
    "SwarmError", "ContractViolation", "ConfigError", "CapabilityDenied",
    "SpecInfeasible", "PhaseConflict", "PhysicsFault", "ProtocolError",
    "ParseError", "DivergenceError",
]
