/**
 * Browser entry point: wires the connection, keyboard, and render loop.
 */

import { type Draw } from "./draw.js";
import { makeTokenStore } from "./identity.js";
import { captureKey, isGameKey, releaseAll } from "./input.js";
import { Connection, type SocketLike } from "./net.js";
import { AGENT_PALETTE, agentColor, renderNeighborhood, renderOverhead } from "./render.js";
import {
  type ClientState,
  applyServerFrame,
  initialState,
  overheadAgeSec,
  overheadIsStale,
  setPressed,
  setStatus,
} from "./state.js";

function canvasCtx(id: string): { ctx: Draw; width: number; height: number } {
  const canvas = document.getElementById(id) as HTMLCanvasElement | null;
  if (canvas === null) throw new Error(`missing canvas #${id}`);
  const ctx = canvas.getContext("2d");
  if (ctx === null) throw new Error("2d context unavailable");
  return { ctx: ctx as Draw, width: canvas.width, height: canvas.height };
}

const neigh = canvasCtx("neighborhood");
const over = canvasCtx("overhead");
const statusBar = document.getElementById("status")!;
const colorSwatch = document.getElementById("swatch")!;

let state: ClientState = initialState();

// adapter: the connection module sees a minimal socket surface
function browserSocket(url: string): SocketLike {
  const ws = new WebSocket(url);
  const like: SocketLike = { send: (d) => ws.send(d), close: () => ws.close(), onopen: null, onmessage: null, onclose: null };
  ws.onopen = () => like.onopen?.();
  ws.onmessage = (ev) => like.onmessage?.({ data: ev.data });
  ws.onclose = () => like.onclose?.();
  return like;
}

const store = makeTokenStore(document);
const wsProto = location.protocol === "https:" ? "wss" : "ws";
const conn = new Connection(
  `${wsProto}://${location.host}/ws`,
  store,
  {
    onFrame(frame) {
      state = applyServerFrame(state, frame, performance.now());
    },
    onStatus(status) {
      state = setStatus(state, status);
    },
  },
  browserSocket,
);
conn.connect();

function canDrive(): boolean {
  return conn.isOpen() && state.role === "player" && state.phase === "running";
}

window.addEventListener("keydown", (ev) => {
  if (!isGameKey(ev.key)) return;
  ev.preventDefault();
  const result = captureKey(state.pressed, { kind: "down", key: ev.key, repeat: ev.repeat });
  state = setPressed(state, result.pressed);
  if (!canDrive()) return;
  for (const frame of result.frames) conn.send(frame);
});

window.addEventListener("keyup", (ev) => {
  if (!isGameKey(ev.key)) return;
  ev.preventDefault();
  const result = captureKey(state.pressed, { kind: "up", key: ev.key });
  state = setPressed(state, result.pressed);
  if (!canDrive()) return;
  for (const frame of result.frames) conn.send(frame);
});

// losing focus releases everything, otherwise keys stick until refocus
window.addEventListener("blur", () => {
  const result = releaseAll(state.pressed);
  state = setPressed(state, result.pressed);
  if (!canDrive()) return;
  for (const frame of result.frames) conn.send(frame);
});

function statusText(now: number): string {
  const parts: string[] = [];
  parts.push(state.status === "open" ? "connected" : state.status);
  if (state.role !== null) {
    parts.push(state.agentId !== null ? `${state.role} #${state.agentId}` : state.role);
  }
  if (state.phase !== null) {
    if (state.phase === "running" && state.countdownUntilMs !== null && now < state.countdownUntilMs) {
      parts.push(`starting in ${Math.ceil((state.countdownUntilMs - now) / 1000)}`);
    } else {
      parts.push(state.phase);
    }
  }
  const age = overheadAgeSec(state, now);
  if (age !== null) {
    parts.push(`overhead ${age.toFixed(1)}s${overheadIsStale(state, now) ? " (stale)" : ""}`);
  }
  if (state.lastError !== null) {
    parts.push(state.lastError);
  }
  return parts.join("  |  ");
}

function frame(): void {
  const now = performance.now();
  renderNeighborhood(neigh.ctx, state, neigh);
  renderOverhead(over.ctx, state, over, now);
  statusBar.textContent = statusText(now);
  const swatchColor = state.role === "player" ? agentColor(state.selfColor) : AGENT_PALETTE[0];
  (colorSwatch as HTMLElement).style.background = state.role === "player" ? swatchColor : "transparent";
  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
