/**
 * Server connection: WebSocket lifecycle, hello handshake, reconnect.
 *
 * On open the client introduces itself with the stored token (or null for
 * a first visit); the welcome reply carries the token to persist. Unplanned
 * closes trigger reconnect attempts with doubling backoff, re-sending the
 * stored token so the same agent is resumed.
 */

import type { TokenStore } from "./identity.js";
import {
  type ClientFrame,
  type ServerFrame,
  encodeFrame,
  helloFrame,
  parseServerFrame,
} from "./protocol.js";

/** The subset of WebSocket the client uses; fakes implement this in tests. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;
export type Scheduler = (fn: () => void, delayMs: number) => void;

export interface ConnectionEvents {
  onFrame(frame: ServerFrame): void;
  onStatus(status: "connecting" | "open" | "closed"): void;
}

const BACKOFF_START_MS = 500;
const BACKOFF_CAP_MS = 8000;

export class Connection {
  private socket: SocketLike | null = null;
  private open = false;
  private stopped = false;
  private backoffMs = BACKOFF_START_MS;

  constructor(
    private readonly url: string,
    private readonly store: TokenStore,
    private readonly events: ConnectionEvents,
    private readonly makeSocket: SocketFactory,
    private readonly schedule: Scheduler = (fn, ms) => {
      setTimeout(fn, ms);
    },
  ) {}

  connect(): void {
    if (this.stopped) return;
    this.events.onStatus("connecting");
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.open = true;
      this.backoffMs = BACKOFF_START_MS;
      socket.send(encodeFrame(helloFrame(this.store.load())));
      this.events.onStatus("open");
    };
    socket.onmessage = (ev) => {
      if (typeof ev.data !== "string") return;
      let frame: ServerFrame;
      try {
        frame = parseServerFrame(ev.data);
      } catch {
        return; // tolerate one bad frame rather than tearing down the view
      }
      if (frame.type === "welcome") {
        this.store.save(frame.token);
      }
      this.events.onFrame(frame);
    };
    socket.onclose = () => {
      const wasOpen = this.open;
      this.open = false;
      this.socket = null;
      this.events.onStatus("closed");
      if (this.stopped) return;
      const delay = wasOpen ? BACKOFF_START_MS : this.backoffMs;
      this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_CAP_MS);
      this.schedule(() => this.connect(), delay);
    };
  }

  /** Send a frame if the socket is open; otherwise the frame is dropped. */
  send(frame: ClientFrame): boolean {
    if (!this.open || this.socket === null) return false;
    this.socket.send(encodeFrame(frame));
    return true;
  }

  isOpen(): boolean {
    return this.open;
  }

  /** Stop reconnecting and close the socket. */
  shutdown(): void {
    this.stopped = true;
    if (this.socket !== null) this.socket.close();
  }
}
