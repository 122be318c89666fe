import json
import math

import pytest
from hypothesis import given, strategies as st

from conftest import make_config
from swarmgame.bots import (
    ConstantKeysPolicy,
    IdlePolicy,
    LocalPolicy,
    OraclePolicy,
    PolicyObservation,
    compass_keys,
    oracle_policies,
    policies_by_name,
    run_headless,
)
from swarmgame.engine import InstancePhase
from swarmgame.formation import distance_to_pattern
from swarmgame.model import KEY_DOWN, KEY_LEFT, KEY_RIGHT, KEY_UP, MOTION_KEYS
from swarmgame.replay import metrics, replay
from swarmgame.sensing import KIND_NONE, KIND_WALL

DIAG = math.sqrt(0.5)

COMPASS_DIRS = {
    frozenset({KEY_UP}): (0.0, -1.0),
    frozenset({KEY_DOWN}): (0.0, 1.0),
    frozenset({KEY_LEFT}): (-1.0, 0.0),
    frozenset({KEY_RIGHT}): (1.0, 0.0),
    frozenset({KEY_UP, KEY_LEFT}): (-DIAG, -DIAG),
    frozenset({KEY_UP, KEY_RIGHT}): (DIAG, -DIAG),
    frozenset({KEY_DOWN, KEY_LEFT}): (-DIAG, DIAG),
    frozenset({KEY_DOWN, KEY_RIGHT}): (DIAG, DIAG),
}


def obs(scan=None, tick=0, self_pos=None):
    return PolicyObservation(tick=tick, self_color=0, scan=scan, overhead=None,
                             overhead_age_ticks=None, self_pos=self_pos)


# --- compass mapping ---------------------------------------------------------

@pytest.mark.parametrize("vec,want", [
    ((0.0, -1.0), {KEY_UP}),
    ((0.0, 1.0), {KEY_DOWN}),
    ((-1.0, 0.0), {KEY_LEFT}),
    ((1.0, 0.0), {KEY_RIGHT}),
    ((1.0, -1.0), {KEY_UP, KEY_RIGHT}),
    ((-3.0, 3.0), {KEY_DOWN, KEY_LEFT}),
    ((0.2, 1.0), {KEY_DOWN}),
    ((0.0, 0.0), set()),
])
def test_compass_table(vec, want):
    assert compass_keys(*vec) == frozenset(want)


def test_compass_boundary_prefers_table_order():
    # exactly between N and NE: both dots tie, the earlier entry wins
    bearing = math.radians(-67.5)
    assert compass_keys(math.cos(bearing), math.sin(bearing)) == frozenset({KEY_UP})


@given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4))
def test_compass_picks_a_nearest_direction(dx, dy):
    keys = compass_keys(dx, dy)
    if dx == 0.0 and dy == 0.0:
        assert keys == frozenset()
        return
    assert keys in COMPASS_DIRS
    assert keys <= set(MOTION_KEYS)
    norm = math.hypot(dx, dy)
    dots = {k: (dx * ux + dy * uy) / norm for k, (ux, uy) in COMPASS_DIRS.items()}
    assert dots[keys] >= max(dots.values()) - 2e-9


# --- policies in isolation --------------------------------------------------------

def test_oracle_walks_toward_target_then_stops():
    policy = OraclePolicy((100.0, 100.0), target_color_key="S", stop_radius=10.0)
    first = policy.act(obs(self_pos=(100.0, 200.0)))
    assert first.keys == frozenset({KEY_UP})
    assert first.color_key == "S"
    second = policy.act(obs(self_pos=(100.0, 195.0)))
    assert second.color_key is None   # color is sent exactly once
    assert policy.act(obs(self_pos=(104.0, 104.0))).keys == frozenset()


def test_oracle_without_position_stays_put():
    policy = OraclePolicy((100.0, 100.0))
    assert policy.act(obs(self_pos=None)).keys == frozenset()


def scan_of(n, hits):
    rays = [(150.0, KIND_NONE)] * n
    for i, dist, kind in hits:
        rays[i] = (float(dist), kind)
    return tuple(rays)


def test_local_policy_flees_close_contact():
    # nearest return at bearing 0 (east) inside the margin: run west
    scan = scan_of(8, [(0, 14.0, 2)])
    assert LocalPolicy(24.0).act(obs(scan)).keys == frozenset({KEY_LEFT})
    # contact from the south: run north
    scan = scan_of(8, [(2, 6.0, 2)])
    assert LocalPolicy(24.0).act(obs(scan)).keys == frozenset({KEY_UP})


def test_local_policy_skirts_walls_when_clear():
    # wall to the south at a safe distance: move along it, not away
    scan = scan_of(8, [(2, 40.0, KIND_WALL)])
    assert LocalPolicy(24.0).act(obs(scan)).keys == frozenset({KEY_LEFT})
    scan = scan_of(8, [(4, 40.0, KIND_WALL)])
    assert LocalPolicy(24.0).act(obs(scan)).keys == frozenset({KEY_UP})


def test_local_policy_defaults_north_when_blind():
    assert LocalPolicy(24.0).act(obs(None)).keys == frozenset({KEY_UP})
    assert LocalPolicy(24.0).act(obs(scan_of(8, []))).keys == frozenset({KEY_UP})


def test_policies_by_name():
    config = make_config()
    oracles = policies_by_name("oracle", config, 4)
    assert len(oracles) == 4
    for p in oracles:
        assert distance_to_pattern(p.target, config.formation.pattern) < 1e-9
    locals_ = policies_by_name("local", config, 2)
    assert all(p.separation_px == 24.0 for p in locals_)
    assert len(policies_by_name("idle", config, 3)) == 3
    with pytest.raises(ValueError):
        policies_by_name("swarm", config, 3)


# --- headless runs -------------------------------------------------------------

def test_oracle_bots_complete_the_objective(tmp_path):
    config = make_config(max_players=6)
    result = run_headless(config, oracle_policies(config, 6), 600, log_dir=tmp_path)
    assert result.completed
    assert result.engine.phase is InstancePhase.COMPLETE
    assert result.doc is not None
    report = metrics(result.doc)
    assert report.task_duration_ms == result.engine.phase_times["complete"]
    assert report.final_residual <= config.formation.dist_tol
    assert replay(result.doc)[-1].tick == result.ticks_run


def test_local_bots_keep_separation(tmp_path):
    config = make_config(
        placement={"kind": "explicit",
                   "agents": [[200, 150, 0], [221, 150, 0]]},
        max_players=2,
    )
    result = run_headless(config, [LocalPolicy(24.0), LocalPolicy(24.0)], 50,
                          log_dir=tmp_path)
    agents = sorted(result.engine.world.agents, key=lambda a: a.agent_id)
    gap = math.hypot(agents[1].x - agents[0].x, agents[1].y - agents[0].y)
    assert gap >= 24.0


def test_idle_bots_run_out_the_clock(tmp_path):
    result = run_headless(make_config(max_players=3), [IdlePolicy()] * 3, 20,
                          log_dir=tmp_path)
    assert not result.completed
    assert result.ticks_run == 20
    assert result.overhead_captures == 2
    assert result.engine.status()["end_reason"] == "aborted:max_ticks"
    end = result.doc.records[-1]
    assert end["kind"] == "instance_end"
    assert end["reason"] == "aborted:max_ticks"


class ExplodingPolicy:
    privileged = False

    def __init__(self, fuse):
        self.fuse = fuse

    def act(self, observation):
        if observation.tick >= self.fuse:
            raise ValueError("boom")
        return IdlePolicy().act(observation)


def test_policy_exception_aborts_cleanly(tmp_path):
    policies = [IdlePolicy(), IdlePolicy(), ExplodingPolicy(fuse=5)]
    result = run_headless(make_config(max_players=3), policies, 50, log_dir=tmp_path)
    assert result.engine.phase is InstancePhase.ABORTED
    assert result.engine.status()["end_reason"] == "aborted:policy_error: boom"
    assert result.doc.records[-1]["reason"] == "aborted:policy_error: boom"


def test_input_frames_sent_only_on_key_change(tmp_path):
    policies = [ConstantKeysPolicy(frozenset({KEY_UP})) for _ in range(3)]
    result = run_headless(make_config(max_players=3), policies, 30, log_dir=tmp_path)
    inputs = [r for r in result.doc.records if r["record"] == "input"]
    assert len(inputs) == 3
    assert all(r["keys"] == ["Up"] for r in inputs)


def test_frame_tap_sees_codec_output(tmp_path):
    frames = []
    result = run_headless(make_config(max_players=3), [IdlePolicy()] * 3, 12,
                          log_dir=tmp_path, frame_tap=lambda aid, text: frames.append((aid, text)))
    decoded = [json.loads(text) for _, text in frames]
    assert all(isinstance(f, dict) and "type" in f for f in decoded)
    kinds = {f["type"] for f in decoded}
    assert {"welcome", "phase", "scan", "overhead"} <= kinds
    welcome_ids = [f["agent_id"] for f in decoded if f["type"] == "welcome"]
    assert welcome_ids == [0, 1, 2]
    per_tick_scans = sum(1 for f in decoded if f["type"] == "scan")
    assert per_tick_scans == 3 * 12


def test_denied_color_switch_does_not_stop_the_run(tmp_path):
    config = make_config(capabilities={"color_switching": False}, max_players=4)
    frames = []
    result = run_headless(config, oracle_policies(config, 4), 600, log_dir=tmp_path,
                          frame_tap=lambda aid, text: frames.append(json.loads(text)))
    denied = [f for f in frames if f["type"] == "error"
              and f["code"] == "capability_denied"]
    assert len(denied) == 4   # one refused switch per bot
    assert result.completed   # formation still completes without consensus
