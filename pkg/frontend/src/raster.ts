/**
 * Software rasterizer for snapshot tests.
 *
 * Implements the Draw surface on a plain RGBA buffer with deterministic
 * integer sampling (pixel centers, even-odd fill, no antialiasing), so
 * rendering the same frames always produces identical bytes on every
 * platform. Only what the renderer uses is implemented.
 */

import type { Draw } from "./draw.js";

type RGBA = [number, number, number, number];

const ARC_STEP_RAD = 0.05;

function parseColor(style: string | object): RGBA {
  if (typeof style !== "string") {
    throw new Error("raster context only supports string colors");
  }
  const s = style.trim();
  if (s.startsWith("#")) {
    const hex = s.slice(1);
    if (hex.length === 3) {
      const r = parseInt(hex[0]! + hex[0], 16);
      const g = parseInt(hex[1]! + hex[1], 16);
      const b = parseInt(hex[2]! + hex[2], 16);
      return [r, g, b, 255];
    }
    if (hex.length === 6 || hex.length === 8) {
      const r = parseInt(hex.slice(0, 2), 16);
      const g = parseInt(hex.slice(2, 4), 16);
      const b = parseInt(hex.slice(4, 6), 16);
      const a = hex.length === 8 ? parseInt(hex.slice(6, 8), 16) : 255;
      return [r, g, b, a];
    }
    throw new Error(`unsupported hex color ${s}`);
  }
  const fn = s.match(/^rgba?\(([^)]*)\)$/);
  if (fn) {
    const parts = fn[1]!.split(",").map((p) => parseFloat(p.trim()));
    if (parts.length === 3 || parts.length === 4) {
      const [r, g, b] = parts;
      const a = parts.length === 4 ? Math.round(parts[3]! * 255) : 255;
      return [r!, g!, b!, a];
    }
  }
  throw new Error(`unsupported color ${s}`);
}

interface Subpath {
  points: number[]; // x0, y0, x1, y1, ...
  closed: boolean;
}

interface GfxState {
  fillStyle: string | object;
  strokeStyle: string | object;
  lineWidth: number;
  clip: Uint8Array | null; // 1 = visible; null = everything
}

export class RasterContext implements Draw {
  readonly width: number;
  readonly height: number;
  readonly pixels: Uint8ClampedArray;

  fillStyle: string | object = "#000000";
  strokeStyle: string | object = "#000000";
  lineWidth = 1;

  private clipMask: Uint8Array | null = null;
  private stack: GfxState[] = [];
  private subpaths: Subpath[] = [];
  private current: Subpath | null = null;

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
    this.pixels = new Uint8ClampedArray(width * height * 4);
    // opaque black canvas; renderers fill their own background
    for (let i = 3; i < this.pixels.length; i += 4) this.pixels[i] = 255;
  }

  save(): void {
    this.stack.push({
      fillStyle: this.fillStyle,
      strokeStyle: this.strokeStyle,
      lineWidth: this.lineWidth,
      clip: this.clipMask,
    });
  }

  restore(): void {
    const prev = this.stack.pop();
    if (prev === undefined) return;
    this.fillStyle = prev.fillStyle;
    this.strokeStyle = prev.strokeStyle;
    this.lineWidth = prev.lineWidth;
    this.clipMask = prev.clip;
  }

  beginPath(): void {
    this.subpaths = [];
    this.current = null;
  }

  moveTo(x: number, y: number): void {
    this.current = { points: [x, y], closed: false };
    this.subpaths.push(this.current);
  }

  lineTo(x: number, y: number): void {
    if (this.current === null) {
      this.moveTo(x, y);
      return;
    }
    this.current.points.push(x, y);
  }

  closePath(): void {
    if (this.current !== null && this.current.points.length >= 4) {
      this.current.closed = true;
    }
    this.current = null;
  }

  rect(x: number, y: number, w: number, h: number): void {
    this.moveTo(x, y);
    this.lineTo(x + w, y);
    this.lineTo(x + w, y + h);
    this.lineTo(x, y + h);
    this.closePath();
    this.moveTo(x, y);
  }

  arc(cx: number, cy: number, r: number, a0: number, a1: number, ccw = false): void {
    let sweep = a1 - a0;
    if (!ccw) {
      if (sweep < 0) sweep += 2 * Math.PI * Math.ceil(-sweep / (2 * Math.PI));
      if (sweep > 2 * Math.PI) sweep = 2 * Math.PI;
    } else {
      if (sweep > 0) sweep -= 2 * Math.PI * Math.ceil(sweep / (2 * Math.PI));
      if (sweep < -2 * Math.PI) sweep = -2 * Math.PI;
    }
    const steps = Math.max(2, Math.min(1024, Math.ceil(Math.abs(sweep) / ARC_STEP_RAD)));
    for (let i = 0; i <= steps; i++) {
      const theta = a0 + (sweep * i) / steps;
      const px = cx + Math.cos(theta) * r;
      const py = cy + Math.sin(theta) * r;
      if (i === 0 && this.current === null) this.moveTo(px, py);
      else this.lineTo(px, py);
    }
  }

  clip(): void {
    const mask = new Uint8Array(this.width * this.height);
    this.scanFill(this.subpaths, (x, y) => {
      mask[y * this.width + x] = 1;
    });
    if (this.clipMask !== null) {
      const old = this.clipMask;
      for (let i = 0; i < mask.length; i++) mask[i] = mask[i]! & old[i]!;
    }
    this.clipMask = mask;
  }

  fill(): void {
    const color = parseColor(this.fillStyle);
    this.scanFill(this.subpaths, (x, y) => this.blend(x, y, color));
  }

  stroke(): void {
    const color = parseColor(this.strokeStyle);
    const half = this.lineWidth / 2;
    for (const sub of this.subpaths) {
      const pts = sub.points;
      const segs = pts.length / 2 - (sub.closed ? 0 : 1);
      for (let i = 0; i < segs; i++) {
        const x0 = pts[i * 2]!;
        const y0 = pts[i * 2 + 1]!;
        const j = ((i + 1) * 2) % pts.length;
        const x1 = pts[j]!;
        const y1 = pts[j + 1]!;
        const dx = x1 - x0;
        const dy = y1 - y0;
        const len = Math.hypot(dx, dy);
        if (len === 0) continue;
        const nx = (-dy / len) * half;
        const ny = (dx / len) * half;
        const quad: Subpath = {
          points: [x0 + nx, y0 + ny, x1 + nx, y1 + ny, x1 - nx, y1 - ny, x0 - nx, y0 - ny],
          closed: true,
        };
        this.scanFill([quad], (x, y) => this.blend(x, y, color));
      }
    }
  }

  fillRect(x: number, y: number, w: number, h: number): void {
    const color = parseColor(this.fillStyle);
    const x0 = Math.max(0, Math.ceil(x - 0.5));
    const x1 = Math.min(this.width - 1, Math.ceil(x + w - 0.5) - 1);
    const y0 = Math.max(0, Math.ceil(y - 0.5));
    const y1 = Math.min(this.height - 1, Math.ceil(y + h - 0.5) - 1);
    for (let py = y0; py <= y1; py++) {
      for (let px = x0; px <= x1; px++) {
        this.blend(px, py, color);
      }
    }
  }

  private blend(x: number, y: number, color: RGBA): void {
    if (this.clipMask !== null && this.clipMask[y * this.width + x] === 0) return;
    const idx = (y * this.width + x) * 4;
    const a = color[3] / 255;
    if (a >= 1) {
      this.pixels[idx] = color[0];
      this.pixels[idx + 1] = color[1];
      this.pixels[idx + 2] = color[2];
      this.pixels[idx + 3] = 255;
      return;
    }
    this.pixels[idx] = Math.round(color[0] * a + this.pixels[idx]! * (1 - a));
    this.pixels[idx + 1] = Math.round(color[1] * a + this.pixels[idx + 1]! * (1 - a));
    this.pixels[idx + 2] = Math.round(color[2] * a + this.pixels[idx + 2]! * (1 - a));
  }

  /** Even-odd scanline fill over pixel centers, calling plot per covered pixel. */
  private scanFill(subpaths: Subpath[], plot: (x: number, y: number) => void): void {
    let minY = Infinity;
    let maxY = -Infinity;
    const edges: number[][] = []; // x0, y0, x1, y1 with y0 < y1
    for (const sub of subpaths) {
      const pts = sub.points;
      const count = pts.length / 2;
      if (count < 2) continue;
      // the wrap edge implicitly closes open subpaths, same as canvas fill
      for (let i = 0; i < count; i++) {
        const j = (i + 1) % count;
        const x0 = pts[i * 2]!;
        const y0 = pts[i * 2 + 1]!;
        const x1 = pts[j * 2]!;
        const y1 = pts[j * 2 + 1]!;
        if (y0 === y1) continue;
        edges.push(y0 < y1 ? [x0, y0, x1, y1] : [x1, y1, x0, y0]);
        minY = Math.min(minY, y0, y1);
        maxY = Math.max(maxY, y0, y1);
      }
    }
    if (edges.length === 0) return;
    const yStart = Math.max(0, Math.floor(minY));
    const yEnd = Math.min(this.height - 1, Math.ceil(maxY));
    const xs: number[] = [];
    for (let py = yStart; py <= yEnd; py++) {
      const sy = py + 0.5;
      xs.length = 0;
      for (const edge of edges) {
        const [x0, y0, x1, y1] = edge as [number, number, number, number];
        if (sy < y0 || sy >= y1) continue; // half-open: no double count at shared vertices
        xs.push(x0 + ((sy - y0) * (x1 - x0)) / (y1 - y0));
      }
      if (xs.length < 2) continue;
      xs.sort((a, b) => a - b);
      for (let k = 0; k + 1 < xs.length; k += 2) {
        const xa = Math.max(0, Math.ceil(xs[k]! - 0.5));
        const xb = Math.min(this.width - 1, Math.ceil(xs[k + 1]! - 0.5) - 1);
        for (let px = xa; px <= xb; px++) plot(px, py);
      }
    }
  }
}

/** Encode the buffer as binary PPM (P6), dropping alpha. */
export function toPPM(ctx: RasterContext): Uint8Array {
  const header = `P6\n${ctx.width} ${ctx.height}\n255\n`;
  const head = new TextEncoder().encode(header);
  const out = new Uint8Array(head.length + ctx.width * ctx.height * 3);
  out.set(head, 0);
  let o = head.length;
  for (let i = 0; i < ctx.width * ctx.height; i++) {
    out[o++] = ctx.pixels[i * 4]!;
    out[o++] = ctx.pixels[i * 4 + 1]!;
    out[o++] = ctx.pixels[i * 4 + 2]!;
  }
  return out;
}

/** Decode a binary PPM produced by toPPM. */
export function fromPPM(data: Uint8Array): { width: number; height: number; rgb: Uint8Array } {
  const text = new TextDecoder().decode(data.slice(0, 64));
  const m = text.match(/^P6\n(\d+) (\d+)\n255\n/);
  if (!m) throw new Error("not a P6 ppm produced by this tool");
  const width = parseInt(m[1]!, 10);
  const height = parseInt(m[2]!, 10);
  const offset = m[0].length;
  return { width, height, rgb: new Uint8Array(data.slice(offset, offset + width * height * 3)) };
}

/**
 * Fraction of pixels whose color differs beyond a small channel tolerance.
 * Sizes must match; a mismatch counts as fully different.
 */
export function diffFraction(a: { width: number; height: number; rgb: Uint8Array }, b: { width: number; height: number; rgb: Uint8Array }, channelTol = 2): number {
  if (a.width !== b.width || a.height !== b.height) return 1;
  const total = a.width * a.height;
  let differing = 0;
  for (let i = 0; i < total; i++) {
    const o = i * 3;
    if (
      Math.abs(a.rgb[o]! - b.rgb[o]!) > channelTol ||
      Math.abs(a.rgb[o + 1]! - b.rgb[o + 1]!) > channelTol ||
      Math.abs(a.rgb[o + 2]! - b.rgb[o + 2]!) > channelTol
    ) {
      differing += 1;
    }
  }
  return differing / total;
}
