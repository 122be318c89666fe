/**
 * Wire protocol types and codecs.
 *
 * One UTF-8 JSON object per WebSocket text message, mirroring the server:
 *   client -> server: hello, input, color
 *   server -> client: welcome, scan, overhead, phase, error
 *
 * Scan hits are positional: index k is the bearing 2*pi*k/n_rays.
 * Kind codes: 0 none (ray capped at scan_range), 1 wall, 2 + color for
 * an agent disc. Colors are small ints (0..2).
 */

export const MOTION_KEYS = ["Up", "Down", "Left", "Right"] as const;
export const COLOR_KEYS = ["A", "S", "D"] as const;

export type MotionKey = (typeof MOTION_KEYS)[number];
export type ColorKey = (typeof COLOR_KEYS)[number];
export type Phase = "lobby" | "running" | "complete" | "aborted";
export type Role = "player" | "spectator";

export const KIND_NONE = 0;
export const KIND_WALL = 1;

/** Subset of the welcome config echo the client actually reads. */
export interface InstanceConfigEcho {
  instance_id: string;
  arena: { width: number; height: number };
  physics: { speed: number; agent_radius: number; tick_rate: number };
  sensing: { scan_range: number; n_rays: number; overhead_rate: number; fov: [number, number, number, number] };
  capabilities: { local_sensing: boolean; global_sensing: boolean; color_switching: boolean };
  max_players: number;
}

export interface WelcomeFrame {
  type: "welcome";
  token: string;
  agent_id: number | null;
  role: Role;
  phase: Phase;
  config: InstanceConfigEcho | null;
}

export interface ScanFrame {
  type: "scan";
  tick: number;
  /** [distance, kind] per ray, in bearing order. */
  hits: [number, number][];
  self_color: number;
}

export interface OverheadFrame {
  type: "overhead";
  snapshot_tick: number;
  fov: [number, number, number, number];
  /** [x, y, color] per visible agent. */
  blips: [number, number, number][];
}

export interface PhaseFrame {
  type: "phase";
  phase: Phase;
  tick?: number;
  countdown_ms?: number;
  reason?: string;
}

export interface ErrorFrame {
  type: "error";
  code: string;
  message: string;
}

export type ServerFrame = WelcomeFrame | ScanFrame | OverheadFrame | PhaseFrame | ErrorFrame;

export interface HelloFrame {
  type: "hello";
  token: string | null;
}

export interface InputFrame {
  type: "input";
  keys: MotionKey[];
}

export interface ColorFrame {
  type: "color";
  key: ColorKey;
}

export type ClientFrame = HelloFrame | InputFrame | ColorFrame;

export function helloFrame(token: string | null): HelloFrame {
  return { type: "hello", token };
}

export function inputFrame(keys: readonly MotionKey[]): InputFrame {
  return { type: "input", keys: [...keys] };
}

export function colorFrame(key: ColorKey): ColorFrame {
  return { type: "color", key };
}

export function encodeFrame(frame: ClientFrame): string {
  return JSON.stringify(frame);
}

function isNum(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function numList(v: unknown, size: number, what: string): number[] {
  if (!Array.isArray(v) || v.length !== size || !v.every(isNum)) {
    throw new Error(`expected ${what}`);
  }
  return v as number[];
}

function pair(v: unknown): [number, number] {
  const [a, b] = numList(v, 2, "a [number, number] pair");
  return [a!, b!];
}

function triple(v: unknown): [number, number, number] {
  const [a, b, c] = numList(v, 3, "a [number, number, number] triple");
  return [a!, b!, c!];
}

function rect(v: unknown): [number, number, number, number] {
  const [a, b, c, d] = numList(v, 4, "an [x, y, w, h] rectangle");
  return [a!, b!, c!, d!];
}

const PHASES: readonly string[] = ["lobby", "running", "complete", "aborted"];

/**
 * Decode and shape-check one server frame. Throws on anything that does
 * not match the grammar; the caller decides whether to drop or disconnect.
 */
export function parseServerFrame(text: string): ServerFrame {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (exc) {
    throw new Error(`malformed frame: ${exc}`);
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new Error("frame must be a JSON object");
  }
  const obj = doc as Record<string, unknown>;
  switch (obj.type) {
    case "welcome": {
      if (typeof obj.token !== "string") throw new Error("welcome.token must be a string");
      const agentId = obj.agent_id;
      if (agentId !== null && !isNum(agentId)) throw new Error("welcome.agent_id must be a number or null");
      if (obj.role !== "player" && obj.role !== "spectator") throw new Error("welcome.role is invalid");
      if (typeof obj.phase !== "string" || !PHASES.includes(obj.phase)) throw new Error("welcome.phase is invalid");
      const config = obj.config === null ? null : (obj.config as InstanceConfigEcho);
      if (config !== null && (typeof config !== "object" || !config.capabilities || !config.sensing)) {
        throw new Error("welcome.config is malformed");
      }
      return {
        type: "welcome",
        token: obj.token,
        agent_id: agentId === null ? null : (agentId as number),
        role: obj.role,
        phase: obj.phase as Phase,
        config,
      };
    }
    case "scan": {
      if (!isNum(obj.tick)) throw new Error("scan.tick must be a number");
      if (!Array.isArray(obj.hits)) throw new Error("scan.hits must be a list");
      if (!isNum(obj.self_color)) throw new Error("scan.self_color must be a number");
      return { type: "scan", tick: obj.tick, hits: obj.hits.map(pair), self_color: obj.self_color };
    }
    case "overhead": {
      if (!isNum(obj.snapshot_tick)) throw new Error("overhead.snapshot_tick must be a number");
      if (!Array.isArray(obj.blips)) throw new Error("overhead.blips must be a list");
      return {
        type: "overhead",
        snapshot_tick: obj.snapshot_tick,
        fov: rect(obj.fov),
        blips: obj.blips.map(triple),
      };
    }
    case "phase": {
      if (typeof obj.phase !== "string" || !PHASES.includes(obj.phase)) throw new Error("phase.phase is invalid");
      const out: PhaseFrame = { type: "phase", phase: obj.phase as Phase };
      if (isNum(obj.tick)) out.tick = obj.tick;
      if (isNum(obj.countdown_ms)) out.countdown_ms = obj.countdown_ms;
      if (typeof obj.reason === "string") out.reason = obj.reason;
      return out;
    }
    case "error": {
      if (typeof obj.code !== "string" || typeof obj.message !== "string") {
        throw new Error("error frame needs string code and message");
      }
      return { type: "error", code: obj.code, message: obj.message };
    }
    default:
      throw new Error(`unknown server frame type ${JSON.stringify(obj.type)}`);
  }
}
