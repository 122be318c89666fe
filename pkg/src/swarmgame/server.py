"""Network transport: WebSocket player channel plus the admin HTTP API.

All mutable game state lives on one event loop; connection handlers
queue inputs for the engine and the tick loop fans frames back out.
Per-connection outboxes are bounded and drop oldest first, so one slow
client cannot stall the simulation.
"""

from __future__ import annotations

import asyncio
import hmac
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from fastapi import Depends, FastAPI, HTTPException, Request, WebSocket, WebSocketDisconnect

from .config import config_from_dict, config_to_dict
from .engine import (
    Binding,
    IdentityRegistry,
    InstanceEngine,
    InstancePhase,
    PlayerIdentity,
    TickOutput,
)
from .errors import CapabilityDenied, ConfigError, ContractViolation, ParseError, PhaseConflict, ProtocolError
from .model import COLOR_KEYS
from .protocol import (
    encode,
    error_frame,
    overhead_message,
    parse_client_message,
    phase_frame,
    scan_message,
    welcome_frame,
)

OUTBOUND_QUEUE_LIMIT = 64


@dataclass
class Connection:
    identity: PlayerIdentity
    binding: Binding | None
    outbox: asyncio.Queue

    def send(self, message: dict[str, Any]) -> None:
        """Enqueue one frame, dropping the oldest when the client lags."""
        text = encode(message)
        while True:
            try:
                self.outbox.put_nowait(text)
                return
            except asyncio.QueueFull:
                try:
                    self.outbox.get_nowait()
                except asyncio.QueueEmpty:
                    pass


class ServerState:
    def __init__(self, session_id: str, log_root: str | Path | None,
                 admin_token: str | None,
                 token_factory: Callable[[], str] | None):
        self.registry = IdentityRegistry(session_id, token_factory)
        self.log_root = Path(log_root) if log_root is not None else None
        self.admin_token = admin_token
        self.engine: InstanceEngine | None = None
        self.connections: dict[int, Connection] = {}
        self.tick_task: asyncio.Task | None = None
        self._conn_seq = 0

    @property
    def log_dir(self) -> Path | None:
        if self.log_root is None:
            return None
        return self.log_root / self.registry.session_id

    def add_connection(self, conn: Connection) -> int:
        conn_id = self._conn_seq
        self._conn_seq += 1
        self.connections[conn_id] = conn
        return conn_id

    def broadcast(self, message: dict[str, Any]) -> None:
        for conn in self.connections.values():
            conn.send(message)

    def fan_out(self, out: TickOutput) -> None:
        for conn in self.connections.values():
            binding = conn.binding
            if (binding is not None and binding.agent_id is not None
                    and binding.agent_id in out.scans):
                conn.send(scan_message(out.scans[binding.agent_id]))
            if out.overhead is not None:
                conn.send(overhead_message(out.overhead))
        for msg in out.events:
            self.broadcast(msg)


async def run_tick_loop(state: ServerState, engine: InstanceEngine) -> None:
    """Wall-clock scheduler with absolute deadlines: late ticks are run
    immediately rather than stretched, so simulated time never drifts."""
    loop = asyncio.get_running_loop()
    period = engine.config.physics.tick_period_ms / 1000.0
    deadline = loop.time() + period
    while engine.phase is InstancePhase.RUNNING and state.engine is engine:
        delay = deadline - loop.time()
        if delay > 0:
            await asyncio.sleep(delay)
        deadline += period
        if engine.phase is not InstancePhase.RUNNING:
            break
        state.fan_out(engine.tick_once())


def create_app(
    session_id: str = "session",
    log_root: str | Path | None = "logs",
    static_dir: str | Path | None = None,
    admin_token: str | None = None,
    token_factory: Callable[[], str] | None = None,
) -> FastAPI:
    app = FastAPI(title="swarm game server")
    state = ServerState(
        session_id,
        log_root,
        admin_token if admin_token is not None else os.environ.get("SWARM_ADMIN_TOKEN"),
        token_factory,
    )
    app.state.swarm = state

    def require_admin(request: Request) -> None:
        if not state.admin_token:
            raise HTTPException(503, "admin token is not configured on the server")
        header = request.headers.get("authorization", "")
        supplied = header[7:] if header.startswith("Bearer ") else ""
        if not supplied or not hmac.compare_digest(supplied, state.admin_token):
            raise HTTPException(401, "invalid admin token")

    admin = [Depends(require_admin)]

    def engine_or_404(instance_id: str) -> InstanceEngine:
        engine = state.engine
        if engine is None or engine.config.instance_id != instance_id:
            raise HTTPException(404, f"no instance {instance_id!r}")
        return engine

    @app.post("/admin/instances", dependencies=admin)
    async def create_instance(request: Request) -> dict:
        if state.engine is not None and state.engine.phase is InstancePhase.RUNNING:
            raise HTTPException(409, "an instance is already running")
        try:
            doc = await request.json()
        except Exception as exc:
            raise HTTPException(422, detail={"violations": [f"body is not JSON: {exc}"]})
        try:
            cfg = config_from_dict(doc)
        except ConfigError as exc:
            raise HTTPException(422, detail={"violations": exc.violations})
        state.engine = InstanceEngine(cfg, state.registry, state.log_dir)
        echo = config_to_dict(cfg)
        # live connections roll over into the new lobby in join order
        for conn in state.connections.values():
            conn.binding = state.engine.connect(conn.identity)
            conn.send(welcome_frame(conn.identity.token, conn.binding.agent_id,
                                    conn.binding.role, "lobby", echo))
        state.broadcast(phase_frame("lobby"))
        return {"instance_id": cfg.instance_id, "phase": "lobby", "config": echo}

    @app.post("/admin/instances/{instance_id}/start", dependencies=admin)
    async def start_instance(instance_id: str, sync_ticks: int = 0) -> dict:
        engine = engine_or_404(instance_id)
        try:
            events = engine.start()
        except PhaseConflict as exc:
            raise HTTPException(409, str(exc))
        for msg in events:
            state.broadcast(msg)
        if sync_ticks > 0:
            # deterministic stepping for tests and offline drills
            for _ in range(sync_ticks):
                if engine.phase is not InstancePhase.RUNNING:
                    break
                state.fan_out(engine.tick_once())
        else:
            state.tick_task = asyncio.create_task(run_tick_loop(state, engine))
        return engine.status()

    @app.post("/admin/instances/{instance_id}/tick", dependencies=admin)
    async def tick_instance(instance_id: str, n: int = 1) -> dict:
        """Manual stepping, only sensible alongside sync_ticks starts."""
        engine = engine_or_404(instance_id)
        if engine.phase is not InstancePhase.RUNNING:
            raise HTTPException(409, "instance is not running")
        for _ in range(n):
            if engine.phase is not InstancePhase.RUNNING:
                break
            state.fan_out(engine.tick_once())
        return engine.status()

    @app.post("/admin/instances/{instance_id}/abort", dependencies=admin)
    async def abort_instance(instance_id: str) -> dict:
        engine = engine_or_404(instance_id)
        try:
            events = engine.abort("admin")
        except PhaseConflict as exc:
            raise HTTPException(409, str(exc))
        if state.tick_task is not None:
            state.tick_task.cancel()
            state.tick_task = None
        for msg in events:
            state.broadcast(msg)
        return engine.status()

    @app.get("/admin/instances/{instance_id}", dependencies=admin)
    async def instance_status(instance_id: str) -> dict:
        return engine_or_404(instance_id).status()

    @app.get("/admin/players", dependencies=admin)
    async def players() -> dict:
        live = {c.identity.token_hash for c in state.connections.values()}
        engine = state.engine
        return {
            "players": [
                {
                    "ordinal": p.ordinal,
                    "token_hash": p.token_hash,
                    "connected": p.token_hash in live,
                    "agent_id": engine.agent_id_for(p.token_hash) if engine else None,
                }
                for p in state.registry.players()
            ]
        }

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        try:
            msg = parse_client_message(await ws.receive_text())
            if msg["type"] != "hello":
                raise ProtocolError("first frame must be hello")
        except (ParseError, ProtocolError) as exc:
            await ws.send_text(encode(error_frame("protocol", str(exc))))
            await ws.close(code=1002)
            return
        except WebSocketDisconnect:
            return

        identity = state.registry.hello(msg["token"])
        binding = state.engine.connect(identity) if state.engine is not None else None
        conn = Connection(identity, binding, asyncio.Queue(OUTBOUND_QUEUE_LIMIT))
        conn_id = state.add_connection(conn)
        echo = config_to_dict(state.engine.config) if state.engine is not None else None
        phase = state.engine.phase.value if state.engine is not None else "lobby"
        await ws.send_text(encode(welcome_frame(
            identity.token,
            binding.agent_id if binding else None,
            binding.role if binding else "spectator",
            phase, echo)))

        async def sender() -> None:
            while True:
                await ws.send_text(await conn.outbox.get())

        send_task = asyncio.create_task(sender())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = parse_client_message(raw)
                except ParseError as exc:
                    await ws.send_text(encode(error_frame("protocol", str(exc))))
                    await ws.close(code=1002)
                    break
                except ProtocolError as exc:
                    conn.send(error_frame("protocol", str(exc)))
                    continue
                engine = state.engine
                binding = conn.binding
                if msg["type"] == "hello":
                    conn.send(error_frame("protocol", "connection is already identified"))
                    continue
                if engine is None or binding is None or binding.role != "player":
                    continue  # spectator and out-of-instance input is ignored
                try:
                    if msg["type"] == "input":
                        engine.queue_input(binding.agent_id, msg["keys"])
                    else:
                        engine.queue_color(binding.agent_id, COLOR_KEYS[msg["key"]])
                except CapabilityDenied as exc:
                    conn.send(error_frame("capability_denied", str(exc)))
                except ContractViolation:
                    pass  # binding went stale against a replaced instance
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            state.connections.pop(conn_id, None)
            if state.engine is not None and conn.binding is not None:
                state.engine.disconnect(conn.binding)

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")

    return app
