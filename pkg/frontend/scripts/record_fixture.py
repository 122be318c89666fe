"""Record one bot's server frame stream as a test fixture.

Runs a small deterministic headless instance and captures every frame the
server sends to agent 0, exactly as encoded on the wire. The client test
suite replays this stream to verify the reducers and to pin the snapshot
goldens, so regenerate the goldens whenever this fixture changes.

Usage: python3 frontend/scripts/record_fixture.py
"""

import json
import tempfile
from pathlib import Path

from swarmgame.bots import oracle_policies, run_headless
from swarmgame.config import config_from_dict

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "frames.json"

CONFIG = {
    "instance_id": "client-fixture",
    "arena": {"width": 400, "height": 300},
    "physics": {"speed": 18.0, "agent_radius": 10.0, "tick_rate": 10, "epsilon_contact": 1e-6},
    "sensing": {"scan_range": 150.0, "n_rays": 120, "overhead_rate": 1.0},
    "formation": {
        "pattern": {"kind": "rectangle", "center": [200.0, 150.0], "width": 200.0, "height": 140.0},
        "dist_tol": 20.0,
        "max_gap_factor": 2.0,
        "require_color_consensus": True,
        "hold_ms": 0,
    },
    "capabilities": {"local_sensing": True, "global_sensing": True, "color_switching": True},
    "max_players": 25,
    "placement": {"kind": "uniform_random", "seed": 7},
}


def main() -> None:
    config = config_from_dict(CONFIG)
    taps: list[tuple[int | None, str]] = []
    with tempfile.TemporaryDirectory() as tmp:
        result = run_headless(
            config,
            oracle_policies(config, 3),
            max_ticks=200,
            log_dir=Path(tmp),
            frame_tap=lambda agent, text: taps.append((agent, text)),
        )

    # each bot's own welcome is tapped before it learns its agent id; the
    # bots connect in order, so the first None-tagged welcome is agent 0's
    frames: list[str] = []
    seen_first_welcome = False
    for agent, text in taps:
        if agent == 0:
            frames.append(text)
        elif agent is None and not seen_first_welcome:
            frames.append(text)
            seen_first_welcome = True

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({
        "completed": result.completed,
        "ticks_run": result.ticks_run,
        "frames": frames,
    }, indent=1))
    print(f"wrote {len(frames)} frames (completed={result.completed}, "
          f"ticks={result.ticks_run}) to {OUT}")


if __name__ == "__main__":
    main()
