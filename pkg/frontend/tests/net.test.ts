import { describe, expect, it } from "vitest";

import { type CookieJar, makeTokenStore } from "../src/identity.js";
import { Connection, type SocketLike } from "../src/net.js";
import type { ServerFrame } from "../src/protocol.js";
import { inputFrame } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }
}

interface Harness {
  conn: Connection;
  sockets: FakeSocket[];
  frames: ServerFrame[];
  statuses: string[];
  pending: { fn: () => void; delayMs: number }[];
}

function harness(jar: CookieJar): Harness {
  const sockets: FakeSocket[] = [];
  const frames: ServerFrame[] = [];
  const statuses: string[] = [];
  const pending: { fn: () => void; delayMs: number }[] = [];
  const conn = new Connection(
    "ws://test/ws",
    makeTokenStore(jar),
    {
      onFrame: (frame) => frames.push(frame),
      onStatus: (status) => statuses.push(status),
    },
    () => {
      const socket = new FakeSocket();
      sockets.push(socket);
      return socket;
    },
    (fn, delayMs) => pending.push({ fn, delayMs }),
  );
  return { conn, sockets, frames, statuses, pending };
}

function welcomeText(token: string): string {
  return JSON.stringify({ type: "welcome", token, agent_id: 0, role: "player", phase: "lobby", config: null });
}

describe("connection lifecycle", () => {
  it("first visit sends hello with a null token", () => {
    const h = harness({ cookie: "" });
    h.conn.connect();
    h.sockets[0]!.onopen!();
    expect(JSON.parse(h.sockets[0]!.sent[0]!)).toEqual({ type: "hello", token: null });
    expect(h.statuses).toEqual(["connecting", "open"]);
  });

  it("the welcome token is persisted for later visits", () => {
    const jar: CookieJar = { cookie: "" };
    const h = harness(jar);
    h.conn.connect();
    h.sockets[0]!.onopen!();
    h.sockets[0]!.onmessage!({ data: welcomeText("tok-77") });
    expect(jar.cookie).toContain("tok-77");
    expect(h.frames[0]!.type).toBe("welcome");
  });

  it("a reload resumes the same identity", () => {
    const jar: CookieJar = { cookie: "" };
    const first = harness(jar);
    first.conn.connect();
    first.sockets[0]!.onopen!();
    first.sockets[0]!.onmessage!({ data: welcomeText("tok-42") });

    const second = harness(jar); // fresh page, same cookie jar
    second.conn.connect();
    second.sockets[0]!.onopen!();
    expect(JSON.parse(second.sockets[0]!.sent[0]!)).toEqual({ type: "hello", token: "tok-42" });
  });

  it("an unplanned close schedules a reconnect that reuses the token", () => {
    const jar: CookieJar = { cookie: "" };
    const h = harness(jar);
    h.conn.connect();
    h.sockets[0]!.onopen!();
    h.sockets[0]!.onmessage!({ data: welcomeText("tok-9") });

    h.sockets[0]!.onclose!();
    expect(h.statuses).toEqual(["connecting", "open", "closed"]);
    expect(h.pending).toHaveLength(1);
    h.pending[0]!.fn();
    expect(h.sockets).toHaveLength(2);
    h.sockets[1]!.onopen!();
    expect(JSON.parse(h.sockets[1]!.sent[0]!)).toEqual({ type: "hello", token: "tok-9" });
  });

  it("reconnect backoff doubles while the server stays down", () => {
    const h = harness({ cookie: "" });
    h.conn.connect();
    const delays: number[] = [];
    for (let i = 0; i < 6; i++) {
      h.sockets[h.sockets.length - 1]!.onclose!(); // connect attempt fails
      const task = h.pending.pop()!;
      delays.push(task.delayMs);
      task.fn();
    }
    expect(delays).toEqual([500, 1000, 2000, 4000, 8000, 8000]);
  });

  it("frames sent while closed are dropped", () => {
    const h = harness({ cookie: "" });
    h.conn.connect();
    expect(h.conn.send(inputFrame(["Up"]))).toBe(false);
    h.sockets[0]!.onopen!();
    expect(h.conn.send(inputFrame(["Up"]))).toBe(true);
    expect(h.sockets[0]!.sent).toHaveLength(2); // hello + input
  });

  it("unparseable server frames are tolerated", () => {
    const h = harness({ cookie: "" });
    h.conn.connect();
    h.sockets[0]!.onopen!();
    h.sockets[0]!.onmessage!({ data: "garbage{{" });
    h.sockets[0]!.onmessage!({ data: JSON.stringify({ type: "phase", phase: "running" }) });
    expect(h.frames).toHaveLength(1);
    expect(h.frames[0]!.type).toBe("phase");
  });

  it("shutdown closes the socket and stops reconnecting", () => {
    const h = harness({ cookie: "" });
    h.conn.connect();
    h.sockets[0]!.onopen!();
    h.conn.shutdown();
    expect(h.sockets[0]!.closed).toBe(true);
    expect(h.pending).toHaveLength(0);
    expect(h.conn.isOpen()).toBe(false);
  });
});
