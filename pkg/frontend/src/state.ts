/**
 * Client-side state: a single immutable snapshot updated by reducers.
 *
 * Rendering reads only this state; frames are applied as they arrive and
 * the render loop always draws the latest snapshot (no interpolation).
 */

import type {
  InstanceConfigEcho,
  MotionKey,
  OverheadFrame,
  Phase,
  Role,
  ScanFrame,
  ServerFrame,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

/** Overhead frames older than this many seconds count as stale. */
export const STALE_AFTER_SEC = 1.5;

export interface ClientState {
  status: ConnectionStatus;
  token: string | null;
  agentId: number | null;
  role: Role | null;
  config: InstanceConfigEcho | null;
  phase: Phase | null;
  /** Wall-clock ms when the start countdown ends; display only. */
  countdownUntilMs: number | null;
  scan: ScanFrame | null;
  overhead: OverheadFrame | null;
  /** Wall-clock ms when the overhead frame arrived; drives staleness. */
  overheadAtMs: number | null;
  selfColor: number;
  pressed: MotionKey[];
  /**
   * Motion-cue anchor for the neighborhood floor pattern, advanced by one
   * step per elapsed scan tick in the direction of the held keys. It is a
   * local odometer for the scrolling texture, not a world position: the
   * server never confirms it, and collisions make it drift. Nothing else
   * reads it.
   */
  odometer: { x: number; y: number };
  lastScanTick: number | null;
  lastError: string | null;
}

export function initialState(): ClientState {
  return {
    status: "connecting",
    token: null,
    agentId: null,
    role: null,
    config: null,
    phase: null,
    countdownUntilMs: null,
    scan: null,
    overhead: null,
    overheadAtMs: null,
    selfColor: 0,
    pressed: [],
    odometer: { x: 0, y: 0 },
    lastScanTick: null,
    lastError: null,
  };
}

/** Unit step direction for a held key set; diagonals are normalized. */
export function directionFromKeys(keys: readonly MotionKey[]): { x: number; y: number } {
  let x = 0;
  let y = 0;
  if (keys.includes("Left")) x -= 1;
  if (keys.includes("Right")) x += 1;
  if (keys.includes("Up")) y -= 1;
  if (keys.includes("Down")) y += 1;
  if (x !== 0 && y !== 0) {
    const inv = Math.SQRT1_2;
    return { x: x * inv, y: y * inv };
  }
  return { x, y };
}

function stepPx(config: InstanceConfigEcho | null): number {
  if (config === null) return 0;
  return config.physics.speed / config.physics.tick_rate;
}

/** Apply one server frame; pure, returns the next snapshot. */
export function applyServerFrame(state: ClientState, frame: ServerFrame, nowMs: number): ClientState {
  switch (frame.type) {
    case "welcome":
      return {
        ...state,
        token: frame.token,
        agentId: frame.agent_id,
        role: frame.role,
        phase: frame.phase,
        config: frame.config,
        // a fresh lobby or instance invalidates any previous sensing data
        scan: null,
        overhead: null,
        overheadAtMs: null,
        odometer: { x: 0, y: 0 },
        lastScanTick: null,
      };
    case "scan": {
      let odo = state.odometer;
      if (state.lastScanTick !== null && frame.tick > state.lastScanTick) {
        const dt = frame.tick - state.lastScanTick;
        const dir = directionFromKeys(state.pressed);
        const step = stepPx(state.config) * dt;
        if (dir.x !== 0 || dir.y !== 0) {
          odo = { x: odo.x + dir.x * step, y: odo.y + dir.y * step };
        }
      }
      return { ...state, scan: frame, selfColor: frame.self_color, odometer: odo, lastScanTick: frame.tick };
    }
    case "overhead":
      return { ...state, overhead: frame, overheadAtMs: nowMs };
    case "phase": {
      const next: ClientState = { ...state, phase: frame.phase };
      if (frame.countdown_ms !== undefined) {
        next.countdownUntilMs = nowMs + frame.countdown_ms;
      } else if (frame.phase !== "running") {
        next.countdownUntilMs = null;
      }
      if (frame.phase === "lobby") {
        next.scan = null;
        next.overhead = null;
        next.overheadAtMs = null;
        next.odometer = { x: 0, y: 0 };
        next.lastScanTick = null;
      }
      return next;
    }
    case "error":
      return { ...state, lastError: `${frame.code}: ${frame.message}` };
  }
}

export function setStatus(state: ClientState, status: ConnectionStatus): ClientState {
  return { ...state, status };
}

export function setPressed(state: ClientState, pressed: MotionKey[]): ClientState {
  return { ...state, pressed };
}

/** Seconds since the last overhead frame arrived, or null before the first. */
export function overheadAgeSec(state: ClientState, nowMs: number): number | null {
  if (state.overheadAtMs === null) return null;
  return Math.max(0, (nowMs - state.overheadAtMs) / 1000);
}

export function overheadIsStale(state: ClientState, nowMs: number): boolean {
  const age = overheadAgeSec(state, nowMs);
  return age !== null && age >= STALE_AFTER_SEC;
}
