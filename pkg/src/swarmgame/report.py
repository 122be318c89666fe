"""Figure and CSV rendering for session logs.

Everything is file-based (Agg backend): render_report writes PNG
figures next to the delimited trajectory export and a metrics JSON so a
run can be inspected without any live tooling.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Rectangle

from .config import config_from_dict
from .formation import SegmentChain, distance_to_pattern, perimeter_points
from .replay import metrics
from .sessionlog import LogDocument, export_csv, read_log, split_by_agent

_AGENT_COLORS = {0: "tab:red", 1: "tab:green", 2: "tab:blue"}


def _pattern_xy(pattern) -> tuple[list[float], list[float]]:
    pts = perimeter_points(pattern, 512)
    if not isinstance(pattern, SegmentChain):
        pts = pts + [pts[0]]
    return [p[0] for p in pts], [p[1] for p in pts]


def _arena_axes(ax, cfg) -> None:
    ax.add_patch(Rectangle((0, 0), cfg.arena.width, cfg.arena.height,
                           fill=False, edgecolor="black", linewidth=1.2))
    px, py = _pattern_xy(cfg.formation.pattern)
    ax.plot(px, py, color="0.55", linestyle="--", linewidth=1.0, label="target pattern")
    ax.set_xlim(-20, cfg.arena.width + 20)
    ax.set_ylim(cfg.arena.height + 20, -20)  # screen coordinates: y grows downward
    ax.set_aspect("equal")
    ax.set_xlabel("x (px)")
    ax.set_ylabel("y (px)")


def render_report(log: LogDocument | str | Path, out_dir: str | Path) -> list[Path]:
    """Write trajectories/end-state/timeline figures plus CSV and metrics."""
    doc = log if isinstance(log, LogDocument) else read_log(log, strict=False)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = config_from_dict(doc.header["config"])
    per_agent = split_by_agent(doc)
    written: list[Path] = []

    # agent paths over the arena
    fig, ax = plt.subplots(figsize=(8, 6))
    _arena_axes(ax, cfg)
    for agent_id in sorted(per_agent):
        traj = per_agent[agent_id]["trajectory"]
        if not traj:
            continue
        xs = [s[1] for s in traj]
        ys = [s[2] for s in traj]
        ax.plot(xs, ys, linewidth=0.8, alpha=0.8,
                color=_AGENT_COLORS.get(traj[-1][3], "0.3"))
        ax.plot(xs[0], ys[0], marker=".", markersize=4, color="0.2")
    ax.set_title(f"{doc.header['instance_id']}: trajectories")
    path = out / "trajectories.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    # final placement
    fig, ax = plt.subplots(figsize=(8, 6))
    _arena_axes(ax, cfg)
    fov = cfg.sensing.fov_rect(cfg.arena.width, cfg.arena.height)
    ax.add_patch(Rectangle((fov[0], fov[1]), fov[2], fov[3], fill=False,
                           edgecolor="0.7", linewidth=0.8, label="overhead fov"))
    for agent_id in sorted(per_agent):
        traj = per_agent[agent_id]["trajectory"]
        if not traj:
            continue
        _, x, y, color = traj[-1]
        ax.add_patch(plt.Circle((x, y), cfg.physics.agent_radius,
                                color=_AGENT_COLORS.get(color, "0.3"), alpha=0.9))
    ax.set_title(f"{doc.header['instance_id']}: final state")
    ax.legend(loc="upper right", fontsize=8)
    path = out / "end_state.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    # residual and color spread over time
    ts: list[float] = []
    residuals: list[float] = []
    n_colors: list[int] = []
    for rec in doc.records:
        if rec["record"] != "state" or not rec["agents"]:
            continue
        ts.append(rec["t_ms"] / 1000.0)
        residuals.append(max(distance_to_pattern((x, y), cfg.formation.pattern)
                             for _, x, y, _ in rec["agents"]))
        n_colors.append(len({c for _, _, _, c in rec["agents"]}))
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    ax1.plot(ts, residuals, linewidth=1.0)
    ax1.axhline(cfg.formation.dist_tol, color="tab:red", linestyle=":",
                linewidth=0.8, label="dist_tol")
    ax1.set_ylabel("residual (px)")
    ax1.legend(loc="upper right", fontsize=8)
    ax2.step(ts, n_colors, where="post", linewidth=1.0)
    ax2.set_ylabel("distinct colors")
    ax2.set_xlabel("t (s)")
    ax2.set_ylim(0, 4)
    fig.suptitle(f"{doc.header['instance_id']}: objective timeline")
    path = out / "timeline.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    written.append(export_csv(doc, out / "trajectory.csv"))
    report = metrics(doc)
    metrics_path = out / "metrics.json"
    metrics_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n",
                            encoding="utf-8")
    written.append(metrics_path)
    return written
