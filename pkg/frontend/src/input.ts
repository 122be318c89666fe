/**
 * Keyboard capture: maps DOM key events to protocol frames.
 *
 * Pure function of the event sequence so it can be tested without a DOM.
 * Arrow keydown/keyup re-sends the full current key set; A/S/D keydown
 * sends a color frame; OS key repeat is suppressed.
 */

import {
  type ClientFrame,
  type ColorKey,
  type MotionKey,
  colorFrame,
  inputFrame,
} from "./protocol.js";

const ARROW_MAP: Record<string, MotionKey> = {
  ArrowUp: "Up",
  ArrowDown: "Down",
  ArrowLeft: "Left",
  ArrowRight: "Right",
};

const COLOR_MAP: Record<string, ColorKey> = {
  a: "A",
  A: "A",
  s: "S",
  S: "S",
  d: "D",
  D: "D",
};

export interface KeyEvent {
  kind: "down" | "up";
  /** DOM KeyboardEvent.key value. */
  key: string;
  repeat?: boolean;
}

export interface CaptureResult {
  pressed: MotionKey[];
  frames: ClientFrame[];
}

/** True for keys the client consumes (callers should preventDefault on these). */
export function isGameKey(key: string): boolean {
  return key in ARROW_MAP || key in COLOR_MAP;
}

/**
 * Fold one keyboard event into the pressed-key set.
 *
 * Returns the next set plus the frames to send, in order. Events that
 * change nothing (repeats, unknown keys, release of an unpressed key)
 * produce no frames.
 */
export function captureKey(pressed: readonly MotionKey[], event: KeyEvent): CaptureResult {
  if (event.repeat) {
    return { pressed: [...pressed], frames: [] };
  }
  const arrow = ARROW_MAP[event.key];
  if (arrow !== undefined) {
    if (event.kind === "down") {
      if (pressed.includes(arrow)) {
        // held key reported down again: treat as a repeat
        return { pressed: [...pressed], frames: [] };
      }
      const next = [...pressed, arrow];
      return { pressed: next, frames: [inputFrame(next)] };
    }
    if (!pressed.includes(arrow)) {
      return { pressed: [...pressed], frames: [] };
    }
    const next = pressed.filter((k) => k !== arrow);
    return { pressed: next, frames: [inputFrame(next)] };
  }
  const color = COLOR_MAP[event.key];
  if (color !== undefined && event.kind === "down") {
    return { pressed: [...pressed], frames: [colorFrame(color)] };
  }
  return { pressed: [...pressed], frames: [] };
}

/**
 * Drop every held key at once (window blur, tab switch). Sends a single
 * empty key set rather than one frame per key.
 */
export function releaseAll(pressed: readonly MotionKey[]): CaptureResult {
  if (pressed.length === 0) {
    return { pressed: [], frames: [] };
  }
  return { pressed: [], frames: [inputFrame([])] };
}
