/**
 * Canvas rendering for the two player views.
 *
 * Neighborhood: the polar scan drawn around the player, with a
 * world-anchored floor grid clipped to the visible region so motion reads
 * as scrolling texture. Overhead: the latest snapshot exactly as received,
 * scaled to the arena, with a staleness readout. Disabled views render an
 * explicit unavailable panel instead.
 */

import { type Draw, type Viewport, drawText, textHeight, textWidth } from "./draw.js";
import { KIND_WALL } from "./protocol.js";
import { type ClientState, STALE_AFTER_SEC, overheadAgeSec } from "./state.js";

export const AGENT_PALETTE = ["#ff5252", "#4caf50", "#42a5f5"] as const;

const BG = "#0c0e10";
const FLOOR = "#1d242b";
const GRID_LINE = "#2f3a44";
const WALL_COLOR = "#b0bec5";
const RING = "#455a64";
const PANEL_TEXT = "#78909c";
const WARN = "#ffb300";
const FOV_FILL = "#05060a";
const FOV_EDGE = "#546e7a";
const ARENA_FILL = "#22262b";

/** World-space spacing of the neighborhood floor grid, in px. */
export const GRID_SPACING_PX = 40;

export function agentColor(color: number): string {
  return AGENT_PALETTE[color] ?? AGENT_PALETTE[0];
}

function clearView(ctx: Draw, vp: Viewport): void {
  ctx.fillStyle = BG;
  ctx.fillRect(0, 0, vp.width, vp.height);
}

function centeredLabel(ctx: Draw, vp: Viewport, lines: string[], color: string): void {
  const px = 2;
  const lineGap = 6;
  const total = lines.length * textHeight(px) + (lines.length - 1) * lineGap;
  let y = (vp.height - total) / 2;
  for (const line of lines) {
    drawText(ctx, line, (vp.width - textWidth(line, px)) / 2, y, px, color);
    y += textHeight(px) + lineGap;
  }
}

/** Explicit placeholder for a view whose capability is disabled. */
export function renderUnavailable(ctx: Draw, vp: Viewport, viewName: string): void {
  clearView(ctx, vp);
  ctx.strokeStyle = "#263238";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.rect(8, 8, vp.width - 16, vp.height - 16);
  ctx.stroke();
  centeredLabel(ctx, vp, [viewName, "UNAVAILABLE"], PANEL_TEXT);
}

function renderWaiting(ctx: Draw, vp: Viewport, label: string): void {
  clearView(ctx, vp);
  centeredLabel(ctx, vp, [label], PANEL_TEXT);
}

function traceScanPolygon(ctx: Draw, cx: number, cy: number, hits: [number, number][], zoom: number): void {
  ctx.beginPath();
  const n = hits.length;
  for (let i = 0; i < n; i++) {
    const hit = hits[i]!;
    const theta = (2 * Math.PI * i) / n;
    const px = cx + Math.cos(theta) * hit[0] * zoom;
    const py = cy + Math.sin(theta) * hit[0] * zoom;
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  }
  ctx.closePath();
}

function drawFloorGrid(ctx: Draw, vp: Viewport, cx: number, cy: number, odo: { x: number; y: number }, zoom: number): void {
  const cell = GRID_SPACING_PX * zoom;
  if (cell < 4) return;
  ctx.strokeStyle = GRID_LINE;
  ctx.lineWidth = 1;
  // lines live at world multiples of the spacing; the view is centered on
  // the odometer estimate, so moving east scrolls the pattern west
  const phaseX = ((odo.x % GRID_SPACING_PX) + GRID_SPACING_PX) % GRID_SPACING_PX;
  const phaseY = ((odo.y % GRID_SPACING_PX) + GRID_SPACING_PX) % GRID_SPACING_PX;
  ctx.beginPath();
  for (let x = cx - phaseX * zoom; x >= -cell; x -= cell) {
    ctx.moveTo(x, 0);
    ctx.lineTo(x, vp.height);
  }
  for (let x = cx - phaseX * zoom + cell; x <= vp.width + cell; x += cell) {
    ctx.moveTo(x, 0);
    ctx.lineTo(x, vp.height);
  }
  for (let y = cy - phaseY * zoom; y >= -cell; y -= cell) {
    ctx.moveTo(0, y);
    ctx.lineTo(vp.width, y);
  }
  for (let y = cy - phaseY * zoom + cell; y <= vp.height + cell; y += cell) {
    ctx.moveTo(0, y);
    ctx.lineTo(vp.width, y);
  }
  ctx.stroke();
}

/**
 * Draw the neighborhood view from the latest scan.
 *
 * The visible region is the polygon of per-ray hit distances; the floor
 * grid is drawn only inside it, and hits are marked at their ray
 * endpoints: walls in wall color, agents in their current color.
 */
export function renderNeighborhood(ctx: Draw, state: ClientState, vp: Viewport): void {
  if (state.config !== null && !state.config.capabilities.local_sensing) {
    renderUnavailable(ctx, vp, "LOCAL VIEW");
    return;
  }
  clearView(ctx, vp);
  if (state.scan === null || state.config === null) {
    renderWaiting(ctx, vp, "WAITING FOR SCAN");
    return;
  }
  const scan = state.scan;
  const sensing = state.config.sensing;
  const agentRadius = state.config.physics.agent_radius;
  const cx = vp.width / 2;
  const cy = vp.height / 2;
  const zoom = (Math.min(vp.width, vp.height) / 2 - 12) / sensing.scan_range;

  // visible region: floor fill, then the grid clipped inside it
  traceScanPolygon(ctx, cx, cy, scan.hits, zoom);
  ctx.fillStyle = FLOOR;
  ctx.fill();
  ctx.save();
  traceScanPolygon(ctx, cx, cy, scan.hits, zoom);
  ctx.clip();
  drawFloorGrid(ctx, vp, cx, cy, state.odometer, zoom);
  ctx.restore();

  // out-of-range boundary
  ctx.strokeStyle = RING;
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.arc(cx, cy, sensing.scan_range * zoom, 0, 2 * Math.PI);
  ctx.stroke();

  // hit markers at ray endpoints
  const n = scan.hits.length;
  for (let i = 0; i < n; i++) {
    const hit = scan.hits[i]!;
    const kind = hit[1];
    if (kind === 0) continue;
    const theta = (2 * Math.PI * i) / n;
    const px = cx + Math.cos(theta) * hit[0] * zoom;
    const py = cy + Math.sin(theta) * hit[0] * zoom;
    const isWall = kind === KIND_WALL;
    ctx.fillStyle = isWall ? WALL_COLOR : agentColor(kind - 2);
    ctx.beginPath();
    ctx.arc(px, py, isWall ? 1.6 : 3.0, 0, 2 * Math.PI);
    ctx.fill();
  }

  // self marker at true scale
  ctx.fillStyle = agentColor(state.selfColor);
  ctx.beginPath();
  ctx.arc(cx, cy, Math.max(2.5, agentRadius * zoom), 0, 2 * Math.PI);
  ctx.fill();
  ctx.strokeStyle = "#eceff1";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.arc(cx, cy, Math.max(2.5, agentRadius * zoom), 0, 2 * Math.PI);
  ctx.stroke();
}

/**
 * Draw the overhead view: arena outline, fov rectangle, blips, and the
 * staleness readout. The frame is drawn exactly as received.
 */
export function renderOverhead(ctx: Draw, state: ClientState, vp: Viewport, nowMs: number): void {
  if (state.config !== null && !state.config.capabilities.global_sensing) {
    renderUnavailable(ctx, vp, "OVERHEAD VIEW");
    return;
  }
  clearView(ctx, vp);
  if (state.overhead === null || state.config === null) {
    renderWaiting(ctx, vp, "WAITING FOR SNAPSHOT");
    return;
  }
  const arena = state.config.arena;
  const agentRadius = state.config.physics.agent_radius;
  const margin = 14;
  const scale = Math.min((vp.width - 2 * margin) / arena.width, (vp.height - 2 * margin) / arena.height);
  const ox = (vp.width - arena.width * scale) / 2;
  const oy = (vp.height - arena.height * scale) / 2;

  // arena with its unobserved margin, then the visible fov rectangle
  ctx.fillStyle = ARENA_FILL;
  ctx.fillRect(ox, oy, arena.width * scale, arena.height * scale);
  const [fx, fy, fw, fh] = state.overhead.fov;
  ctx.fillStyle = FOV_FILL;
  ctx.fillRect(ox + fx * scale, oy + fy * scale, fw * scale, fh * scale);
  ctx.strokeStyle = FOV_EDGE;
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.rect(ox + fx * scale, oy + fy * scale, fw * scale, fh * scale);
  ctx.stroke();

  for (const [bx, by, color] of state.overhead.blips) {
    ctx.fillStyle = agentColor(color);
    ctx.beginPath();
    ctx.arc(ox + bx * scale, oy + by * scale, Math.max(2, agentRadius * scale), 0, 2 * Math.PI);
    ctx.fill();
  }

  const age = overheadAgeSec(state, nowMs);
  if (age !== null) {
    const stale = age >= STALE_AFTER_SEC;
    const label = `AGE ${age.toFixed(1)}S`;
    drawText(ctx, label, 8, 8, 2, stale ? WARN : PANEL_TEXT);
    ctx.fillStyle = stale ? WARN : "#37474f";
    ctx.fillRect(8 + textWidth(label, 2) + 8, 10, 10, 10);
  }
}
