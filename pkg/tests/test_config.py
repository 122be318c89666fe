import pytest

from swarmgame.config import (
    Capabilities,
    ExplicitPlacement,
    UniformRandomPlacement,
    config_from_dict,
    config_to_dict,
)
from swarmgame.errors import ConfigError
from swarmgame.formation import RectanglePerimeter


def violations_of(doc):
    with pytest.raises(ConfigError) as info:
        config_from_dict(doc)
    return info.value.violations


def test_empty_doc_yields_defaults():
    cfg = config_from_dict({})
    assert cfg.arena.width == 1200.0
    assert cfg.arena.height == 800.0
    assert cfg.physics.speed == 18.0
    assert cfg.physics.agent_radius == 10.0
    assert cfg.physics.tick_rate == 10
    assert cfg.sensing.scan_range == 150.0
    assert cfg.sensing.n_rays == 360
    assert cfg.sensing.overhead_rate == 1.0
    assert cfg.sensing.fov == (120.0, 80.0, 960.0, 640.0)
    assert cfg.formation.pattern == RectanglePerimeter((600.0, 400.0), 600.0, 400.0)
    assert cfg.formation.dist_tol == 20.0
    assert cfg.formation.hold_ms == 3000
    assert not cfg.formation.require_color_consensus
    assert cfg.capabilities == Capabilities(True, True, True)
    assert cfg.max_players == 25
    assert cfg.capacity == 25
    assert cfg.placement == UniformRandomPlacement(0)
    assert cfg.placement_seed == 0


def test_echo_round_trips():
    doc = {
        "instance_id": "alpha",
        "arena": {"width": 640.0, "height": 480.0},
        "sensing": {"n_rays": 90, "overhead_rate": 0.2},
        "formation": {
            "pattern": {"kind": "circle", "center": [320, 240], "radius": 100},
            "require_color_consensus": True,
        },
        "capabilities": {"global_sensing": False},
        "max_players": 6,
        "placement": {"kind": "uniform_random", "seed": 42},
    }
    cfg = config_from_dict(doc)
    echo = config_to_dict(cfg)
    assert echo["instance_id"] == "alpha"
    assert echo["sensing"]["fov"] == [64.0, 48.0, 512.0, 384.0]
    assert not echo["capabilities"]["global_sensing"]
    assert config_to_dict(config_from_dict(echo)) == echo


def test_all_violations_reported_at_once():
    doc = {
        "arena": {"width": -5, "height": 300},
        "physics": {"speed": 0, "tick_rate": 7},
        "sensing": {"scan_range": 5, "n_rays": 4, "overhead_rate": 0},
        "formation": {"pattern": {"kind": "blob"}, "dist_tol": -1,
                      "max_gap_factor": 0, "hold_ms": -10},
        "capabilities": {"local_sensing": False, "global_sensing": False},
        "max_players": 0,
        "placement": {"kind": "nowhere"},
    }
    v = violations_of(doc)
    text = "\n".join(v)
    for fragment in (
        "arena:", "speed must be positive", "divide 1000",
        "scan_range", "n_rays", "overhead_rate",
        "unknown kind 'blob'", "dist_tol", "max_gap_factor", "hold_ms",
        "at least one of local_sensing/global_sensing",
        "max_players", "placement: unknown kind",
    ):
        assert fragment in text, fragment
    assert len(v) >= 13


def test_tunnel_risk_rejected():
    v = violations_of({"physics": {"speed": 150.0, "agent_radius": 10.0}})
    assert any("per-tick travel" in p for p in v)


def test_fov_must_fit_arena():
    v = violations_of({"sensing": {"fov": [100, 100, 1200, 100]}})
    assert any("fov" in p for p in v)


def test_overhead_rate_bounded_by_tick_rate():
    v = violations_of({"sensing": {"overhead_rate": 11.0}})
    assert any("overhead_rate" in p for p in v)
    cfg = config_from_dict({"sensing": {"overhead_rate": 10.0}})
    assert cfg.sensing.overhead_rate == 10.0


def test_degenerate_chain_rejected():
    v = violations_of({"formation": {"pattern": {"kind": "chain", "points": [[10, 10]]}}})
    assert any("perimeter" in p for p in v)


def test_disabling_one_sense_is_fine():
    cfg = config_from_dict({"capabilities": {"local_sensing": False}})
    assert not cfg.capabilities.local_sensing
    assert cfg.capabilities.global_sensing


def test_explicit_placement_checks():
    base = {"arena": {"width": 400, "height": 300}}
    v = violations_of({**base, "placement": {"kind": "explicit", "agents": [[5, 150, 0]]}})
    assert any("outside the walls" in p for p in v)
    v = violations_of({**base, "placement": {"kind": "explicit", "agents": [[50, 150, 7]]}})
    assert any("invalid color" in p for p in v)
    v = violations_of({**base, "placement": {"kind": "explicit",
                                             "agents": [[50, 150, 0], [60, 150, 1]]}})
    assert any("overlap" in p for p in v)
    v = violations_of({**base, "placement": {"kind": "explicit", "agents": [[50, 150, 0], "x"]}})
    assert any("malformed" in p for p in v)


def test_explicit_placement_capacity():
    doc = {
        "arena": {"width": 400, "height": 300},
        "max_players": 10,
        "placement": {"kind": "explicit",
                      "agents": [[50, 150, 0], [100, 150, 1], [150, 150, 2]]},
    }
    cfg = config_from_dict(doc)
    assert cfg.capacity == 3
    assert cfg.placement_seed is None
    assert cfg.placement == ExplicitPlacement(((50.0, 150.0, 0), (100.0, 150.0, 1),
                                               (150.0, 150.0, 2)))
    cfg = config_from_dict({**doc, "max_players": 2})
    assert cfg.capacity == 2


def test_non_object_doc_rejected():
    with pytest.raises(ConfigError):
        config_from_dict(["not", "a", "dict"])
