import { describe, expect, it } from "vitest";

import { type KeyEvent, captureKey, isGameKey, releaseAll } from "../src/input.js";
import type { ClientFrame, MotionKey } from "../src/protocol.js";

function run(events: KeyEvent[]): { pressed: MotionKey[]; frames: ClientFrame[] } {
  let pressed: MotionKey[] = [];
  const frames: ClientFrame[] = [];
  for (const event of events) {
    const result = captureKey(pressed, event);
    pressed = result.pressed;
    frames.push(...result.frames);
  }
  return { pressed, frames };
}

describe("arrow capture", () => {
  it("press Up then Left sends the two growing key sets", () => {
    const { frames } = run([
      { kind: "down", key: "ArrowUp" },
      { kind: "down", key: "ArrowLeft" },
    ]);
    expect(frames).toEqual([
      { type: "input", keys: ["Up"] },
      { type: "input", keys: ["Up", "Left"] },
    ]);
  });

  it("up, plus left, release all is exactly three frames", () => {
    let pressed: MotionKey[] = [];
    const frames: ClientFrame[] = [];
    for (const event of [
      { kind: "down", key: "ArrowUp" } as KeyEvent,
      { kind: "down", key: "ArrowLeft" } as KeyEvent,
    ]) {
      const result = captureKey(pressed, event);
      pressed = result.pressed;
      frames.push(...result.frames);
    }
    const rel = releaseAll(pressed);
    pressed = rel.pressed;
    frames.push(...rel.frames);
    expect(frames).toEqual([
      { type: "input", keys: ["Up"] },
      { type: "input", keys: ["Up", "Left"] },
      { type: "input", keys: [] },
    ]);
    expect(pressed).toEqual([]);
  });

  it("individual key release sends the remaining set", () => {
    const { frames, pressed } = run([
      { kind: "down", key: "ArrowUp" },
      { kind: "down", key: "ArrowRight" },
      { kind: "up", key: "ArrowUp" },
    ]);
    expect(frames[frames.length - 1]).toEqual({ type: "input", keys: ["Right"] });
    expect(pressed).toEqual(["Right"]);
  });

  it("releasing the last key sends an empty set", () => {
    const { frames } = run([
      { kind: "down", key: "ArrowDown" },
      { kind: "up", key: "ArrowDown" },
    ]);
    expect(frames).toEqual([
      { type: "input", keys: ["Down"] },
      { type: "input", keys: [] },
    ]);
  });

  it("key repeat is suppressed", () => {
    const { frames } = run([
      { kind: "down", key: "ArrowUp" },
      { kind: "down", key: "ArrowUp", repeat: true },
      { kind: "down", key: "ArrowUp", repeat: true },
    ]);
    expect(frames).toHaveLength(1);
  });

  it("a duplicate down without repeat flag is still ignored", () => {
    const { frames } = run([
      { kind: "down", key: "ArrowUp" },
      { kind: "down", key: "ArrowUp" },
    ]);
    expect(frames).toHaveLength(1);
  });

  it("release of an unpressed key is a no-op", () => {
    const { frames } = run([{ kind: "up", key: "ArrowLeft" }]);
    expect(frames).toHaveLength(0);
  });

  it("releaseAll with nothing held sends nothing", () => {
    expect(releaseAll([]).frames).toHaveLength(0);
  });
});

describe("color capture", () => {
  it("press S sends a color frame", () => {
    const { frames } = run([{ kind: "down", key: "s" }]);
    expect(frames).toEqual([{ type: "color", key: "S" }]);
  });

  it("uppercase and lowercase both map", () => {
    const { frames } = run([
      { kind: "down", key: "A" },
      { kind: "down", key: "d" },
    ]);
    expect(frames).toEqual([
      { type: "color", key: "A" },
      { type: "color", key: "D" },
    ]);
  });

  it("color keyup sends nothing", () => {
    const { frames } = run([
      { kind: "down", key: "a" },
      { kind: "up", key: "a" },
    ]);
    expect(frames).toHaveLength(1);
  });

  it("color repeat is suppressed", () => {
    const { frames } = run([
      { kind: "down", key: "s" },
      { kind: "down", key: "s", repeat: true },
    ]);
    expect(frames).toHaveLength(1);
  });

  it("color keys do not disturb the motion set", () => {
    const { frames, pressed } = run([
      { kind: "down", key: "ArrowUp" },
      { kind: "down", key: "s" },
    ]);
    expect(pressed).toEqual(["Up"]);
    expect(frames).toEqual([
      { type: "input", keys: ["Up"] },
      { type: "color", key: "S" },
    ]);
  });
});

describe("key filtering", () => {
  it("unrelated keys produce nothing", () => {
    const { frames } = run([
      { kind: "down", key: "w" },
      { kind: "down", key: "Enter" },
      { kind: "down", key: " " },
    ]);
    expect(frames).toHaveLength(0);
  });

  it("isGameKey covers arrows and color keys only", () => {
    expect(isGameKey("ArrowUp")).toBe(true);
    expect(isGameKey("a")).toBe(true);
    expect(isGameKey("D")).toBe(true);
    expect(isGameKey("Enter")).toBe(false);
    expect(isGameKey("w")).toBe(false);
  });
});
