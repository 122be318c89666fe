"""Console entry points: server, admin client, log tools, headless runs."""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

from .config import config_from_dict
from .errors import DivergenceError, ParseError, SwarmError


def server_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="swarm-server",
                                     description="Run the game server.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--session", default="session")
    parser.add_argument("--log-root", default="logs")
    parser.add_argument("--static", default="frontend/dist",
                        help="directory of built client assets (optional)")
    args = parser.parse_args(argv)

    import uvicorn

    from .server import create_app

    static = args.static if Path(args.static).is_dir() else None
    app = create_app(session_id=args.session, log_root=args.log_root,
                     static_dir=static)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _admin_request(method: str, url: str, token: str, payload: dict | None = None):
    import requests

    resp = requests.request(method, url, json=payload, timeout=30,
                            headers={"Authorization": f"Bearer {token}"})
    try:
        body = resp.json()
    except ValueError:
        body = {"detail": resp.text}
    return resp.status_code, body


def admin_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="swarm-admin",
                                     description="Admin client for a running server.")
    parser.add_argument("--server", default="http://127.0.0.1:8000")
    parser.add_argument("--config", help="InstanceConfig JSON file (for create)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("create")
    for name in ("start", "abort", "status"):
        p = sub.add_parser(name)
        p.add_argument("instance_id")
        if name == "start":
            p.add_argument("--sync-ticks", type=int, default=0)
    sub.add_parser("players")
    args = parser.parse_args(argv)

    token = os.environ.get("SWARM_ADMIN_TOKEN", "")
    if not token:
        print("SWARM_ADMIN_TOKEN is not set", file=sys.stderr)
        return 2
    base = args.server.rstrip("/")

    if args.command == "create":
        if not args.config:
            print("create requires --config <file>", file=sys.stderr)
            return 2
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        code, body = _admin_request("POST", f"{base}/admin/instances", token, doc)
    elif args.command == "start":
        url = f"{base}/admin/instances/{args.instance_id}/start"
        if args.sync_ticks:
            url += f"?sync_ticks={args.sync_ticks}"
        code, body = _admin_request("POST", url, token)
    elif args.command == "abort":
        code, body = _admin_request(
            "POST", f"{base}/admin/instances/{args.instance_id}/abort", token)
    elif args.command == "status":
        code, body = _admin_request(
            "GET", f"{base}/admin/instances/{args.instance_id}", token)
    else:
        code, body = _admin_request("GET", f"{base}/admin/players", token)

    print(json.dumps(body, indent=2))
    return 0 if 200 <= code < 300 else 1


def log_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="swarm-log",
                                     description="Inspect and transform session logs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("metrics", "replay", "split", "export-csv", "report"):
        p = sub.add_parser(name)
        p.add_argument("log", help="session log (.jsonl or .jsonl.gz)")
        if name == "split":
            p.add_argument("--by-player", action="store_true", default=True)
            p.add_argument("--out-dir")
        elif name == "export-csv":
            p.add_argument("--out")
        elif name == "report":
            p.add_argument("--out-dir")
    args = parser.parse_args(argv)

    from .replay import metrics, replay
    from .sessionlog import export_csv, read_log, split_by_agent

    log_path = Path(args.log)
    stem = log_path.name.removesuffix(".gz").removesuffix(".jsonl")

    try:
        if args.command == "metrics":
            print(json.dumps(metrics(log_path).to_dict(), indent=2))
        elif args.command == "replay":
            trajectory = replay(log_path)
            print(f"replay ok: {trajectory[-1].tick} ticks, no divergence")
        elif args.command == "split":
            doc = read_log(log_path, strict=False)
            out_dir = Path(args.out_dir) if args.out_dir else log_path.parent
            out_dir.mkdir(parents=True, exist_ok=True)
            for agent_id, view in sorted(split_by_agent(doc).items()):
                out = out_dir / f"{stem}.player-{agent_id}.jsonl"
                with open(out, "w", encoding="utf-8") as fh:
                    for rec in view["inputs"]:
                        fh.write(json.dumps({"type": "input", "t_ms": rec["t_ms"],
                                             "keys": rec["keys"]}) + "\n")
                    for rec in view["colors"]:
                        fh.write(json.dumps({"type": "color", "t_ms": rec["t_ms"],
                                             "color": rec["color"]}) + "\n")
                    for t_ms, x, y, color in view["trajectory"]:
                        fh.write(json.dumps({"type": "sample", "t_ms": t_ms, "x": x,
                                             "y": y, "color": color}) + "\n")
                print(out)
        elif args.command == "export-csv":
            doc = read_log(log_path, strict=False)
            out = Path(args.out) if args.out else log_path.parent / f"{stem}.csv"
            print(export_csv(doc, out))
        else:  # report
            from .report import render_report

            out_dir = Path(args.out_dir) if args.out_dir else log_path.parent / f"{stem}_report"
            for path in render_report(log_path, out_dir):
                print(path)
    except DivergenceError as exc:
        print(f"divergence at tick {exc.tick}: {exc.detail}", file=sys.stderr)
        return 1
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def headless_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="swarm-headless",
                                     description="Run a bot-driven instance on virtual time.")
    parser.add_argument("--config", required=True, help="InstanceConfig JSON file")
    parser.add_argument("--policy", choices=("oracle", "local", "idle"), default="oracle")
    parser.add_argument("--bots", type=int, default=None,
                        help="bot count (default: max_players)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the placement seed")
    parser.add_argument("--max-ticks", type=int, default=6000)
    parser.add_argument("--out", help="write the sealed log to this path")
    args = parser.parse_args(argv)

    from .bots import policies_by_name, run_headless

    doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        doc.setdefault("placement", {"kind": "uniform_random"})["seed"] = args.seed
    if args.bots is not None and args.bots > int(doc.get("max_players", 25)):
        doc["max_players"] = args.bots
    try:
        config = config_from_dict(doc)
    except SwarmError as exc:
        print(f"bad config: {exc}", file=sys.stderr)
        return 2
    n = args.bots if args.bots is not None else config.max_players
    policies = policies_by_name(args.policy, config, n)

    with tempfile.TemporaryDirectory(prefix="swarm-headless-") as tmp:
        result = run_headless(config, policies, args.max_ticks, log_dir=tmp)
        summary = {
            "instance_id": config.instance_id,
            "phase": result.engine.phase.value,
            "ticks": result.ticks_run,
            "completed": result.completed,
            "end_reason": result.engine.end_reason,
        }
        if result.log_path is not None and args.out:
            out = Path(args.out)
            out.parent.mkdir(parents=True, exist_ok=True)
            shutil.move(str(result.log_path), out)
            summary["log"] = str(out)
        elif result.log_path is not None:
            summary["log"] = str(result.log_path)
            print("note: log kept only with --out", file=sys.stderr)
        print(json.dumps(summary, indent=2))
    return 0 if result.completed or args.policy != "oracle" else 1
