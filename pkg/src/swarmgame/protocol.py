"""Wire protocol: one UTF-8 JSON object per WebSocket text message.

Client -> server:
    {"type": "hello", "token": "<hex>" | null}
    {"type": "input", "keys": ["Up", "Left", ...]}     # full key set, latched
    {"type": "color", "key": "A" | "S" | "D"}

Server -> client:
    {"type": "welcome", "token", "agent_id", "role", "phase", "config"}
    {"type": "scan", "tick", "hits": [[dist, kind], ...], "self_color"}
    {"type": "overhead", "snapshot_tick", "fov": [x, y, w, h],
     "blips": [[x, y, color], ...]}
    {"type": "phase", "phase", ...}
    {"type": "error", "code", "message"}

Kind codes: 0 none (ray capped), 1 wall, 2 + color for an agent disc.
Colors are small ints (0..2). Scan hits are positional: index k is the
bearing 2*pi*k/n_rays. The codec is lossless: encode/decode round-trips
every frame exactly.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import ParseError, ProtocolError
from .model import COLOR_KEYS, MOTION_KEYS
from .sensing import OverheadFrame, ScanFrame

PHASES = ("lobby", "running", "complete", "aborted")


def encode(message: dict[str, Any]) -> str:
    """Serialize one frame. Keys are sorted so output is reproducible."""
    return json.dumps(message, separators=(",", ":"), sort_keys=True)


def decode(text: str | bytes) -> dict[str, Any]:
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed frame: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("type"), str):
        raise ProtocolError("frame must be an object with a string 'type'")
    return doc


def parse_client_message(text: str | bytes) -> dict[str, Any]:
    """Decode and shape-check a client frame; raises ProtocolError if invalid."""
    doc = decode(text)
    kind = doc["type"]
    if kind == "hello":
        token = doc.get("token")
        if token is not None and not isinstance(token, str):
            raise ProtocolError("hello.token must be a string or null")
        return {"type": "hello", "token": token}
    if kind == "input":
        keys = doc.get("keys")
        if not isinstance(keys, list):
            raise ProtocolError("input.keys must be a list")
        for key in keys:
            if key not in MOTION_KEYS:
                raise ProtocolError(f"unknown movement key {key!r}")
        return {"type": "input", "keys": sorted(set(keys))}
    if kind == "color":
        key = doc.get("key")
        if key not in COLOR_KEYS:
            raise ProtocolError(f"unknown color key {key!r}")
        return {"type": "color", "key": key}
    raise ProtocolError(f"unknown client frame type {kind!r}")


def welcome_frame(token: str, agent_id: int | None, role: str,
                  phase: str, config: dict[str, Any]) -> dict[str, Any]:
    return {
        "type": "welcome",
        "token": token,
        "agent_id": agent_id,
        "role": role,
        "phase": phase,
        "config": config,
    }


def scan_message(frame: ScanFrame) -> dict[str, Any]:
    return {
        "type": "scan",
        "tick": frame.tick,
        "hits": [[h.distance, h.kind] for h in frame.hits],
        "self_color": int(frame.self_color),
    }


def overhead_message(frame: OverheadFrame) -> dict[str, Any]:
    return {
        "type": "overhead",
        "snapshot_tick": frame.snapshot_tick,
        "fov": list(frame.fov),
        "blips": [[x, y, c] for x, y, c in frame.blips],
    }


def phase_frame(phase: str, **extra: Any) -> dict[str, Any]:
    if phase not in PHASES:
        raise ProtocolError(f"unknown phase {phase!r}")
    msg: dict[str, Any] = {"type": "phase", "phase": phase}
    msg.update(extra)
    return msg


def error_frame(code: str, message: str) -> dict[str, Any]:
    return {"type": "error", "code": code, "message": message}
