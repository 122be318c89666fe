"""Shared builders for the test suite."""

from __future__ import annotations

import pytest

from swarmgame.config import config_from_dict


def make_config(**overrides):
    """A small valid instance config; override any top-level section."""
    doc = {
        "instance_id": "test-instance",
        "arena": {"width": 400.0, "height": 300.0},
        "physics": {"speed": 18.0, "agent_radius": 10.0, "tick_rate": 10,
                    "epsilon_contact": 1e-6},
        "sensing": {"scan_range": 150.0, "n_rays": 360, "overhead_rate": 1.0},
        "formation": {
            "pattern": {"kind": "rectangle", "center": [200.0, 150.0],
                        "width": 200.0, "height": 140.0},
            "dist_tol": 20.0,
            "max_gap_factor": 2.0,
            "require_color_consensus": False,
            "hold_ms": 3000,
        },
        "capabilities": {"local_sensing": True, "global_sensing": True,
                         "color_switching": True},
        "max_players": 25,
        "placement": {"kind": "uniform_random", "seed": 1},
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(doc.get(key), dict):
            doc[key] = {**doc[key], **value}
        else:
            doc[key] = value
    return config_from_dict(doc)


@pytest.fixture
def default_config():
    return make_config()
