/** Canvas rendering of the arena, robots, polygons, and posterior bars.
 *
 * Drawing goes through the Draw2D subset of CanvasRenderingContext2D so
 * tests can substitute a recording context.
 */

import type { PolygonWire, SnapshotMessage } from "./protocol.js";
import type { ViewState } from "./state.js";

export interface Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  setLineDash(segments: number[]): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

export interface Layout {
  width: number;
  height: number;
  margin: number;
}

export const COLORS = {
  background: "#10141a",
  arena: "#1c2430",
  arenaEdge: "#3b4a5f",
  robot: "#9fd4ff",
  guess: "rgba(120, 200, 140, 0.35)",
  guessEdge: "#78c88c",
  target: "#e0b050",
  barNeutral: "#5b708c",
  barTarget: "#e0b050",
  barEstimate: "#d06060",
  text: "#d8e0ea",
};

/** Map arena coordinates (y up) to canvas pixels (y down). */
export function arenaTransform(snapshot: SnapshotMessage, layout: Layout) {
  const usableW = layout.width - 2 * layout.margin;
  const usableH = layout.height - 2 * layout.margin;
  const scale = Math.min(usableW / snapshot.arena.width, usableH / snapshot.arena.height);
  const originX = layout.margin;
  const originY = layout.margin + snapshot.arena.height * scale;
  return {
    scale,
    toX: (x: number) => originX + x * scale,
    toY: (y: number) => originY - y * scale,
  };
}

function tracePolygon(ctx: Draw2D, poly: PolygonWire, t: ReturnType<typeof arenaTransform>) {
  ctx.beginPath();
  poly.vertices.forEach(([x, y], i) => {
    if (i === 0) ctx.moveTo(t.toX(x), t.toY(y));
    else ctx.lineTo(t.toX(x), t.toY(y));
  });
  ctx.closePath();
}

function drawRobot(
  ctx: Draw2D,
  t: ReturnType<typeof arenaTransform>,
  x: number,
  y: number,
  theta: number
) {
  // oriented wedge: nose along the heading
  const r = 0.018;
  const nose: [number, number] = [x + r * Math.cos(theta), y + r * Math.sin(theta)];
  const left: [number, number] = [
    x + 0.6 * r * Math.cos(theta + (2.5 * Math.PI) / 3),
    y + 0.6 * r * Math.sin(theta + (2.5 * Math.PI) / 3),
  ];
  const right: [number, number] = [
    x + 0.6 * r * Math.cos(theta - (2.5 * Math.PI) / 3),
    y + 0.6 * r * Math.sin(theta - (2.5 * Math.PI) / 3),
  ];
  ctx.beginPath();
  ctx.moveTo(t.toX(nose[0]), t.toY(nose[1]));
  ctx.lineTo(t.toX(left[0]), t.toY(left[1]));
  ctx.lineTo(t.toX(right[0]), t.toY(right[1]));
  ctx.closePath();
  ctx.fill();
}

export function renderArena(ctx: Draw2D, state: ViewState, layout: Layout): void {
  ctx.clearRect(0, 0, layout.width, layout.height);
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, layout.width, layout.height);

  const snapshot = state.snapshot;
  if (!snapshot) {
    ctx.fillStyle = COLORS.text;
    ctx.font = "14px sans-serif";
    ctx.fillText("waiting for session snapshot...", layout.margin, layout.height / 2);
    return;
  }

  const t = arenaTransform(snapshot, layout);
  ctx.fillStyle = COLORS.arena;
  ctx.fillRect(
    t.toX(0),
    t.toY(snapshot.arena.height),
    snapshot.arena.width * t.scale,
    snapshot.arena.height * t.scale
  );
  ctx.strokeStyle = COLORS.arenaEdge;
  ctx.lineWidth = 1;
  ctx.setLineDash([]);
  ctx.strokeRect(
    t.toX(0),
    t.toY(snapshot.arena.height),
    snapshot.arena.width * t.scale,
    snapshot.arena.height * t.scale
  );

  // target as a distinct dashed outline (practice mode only)
  if (snapshot.target_polygon) {
    ctx.strokeStyle = COLORS.target;
    ctx.lineWidth = 2;
    ctx.setLineDash([6, 4]);
    tracePolygon(ctx, snapshot.target_polygon, t);
    ctx.stroke();
    ctx.setLineDash([]);
  }

  // current guess, filled
  ctx.fillStyle = COLORS.guess;
  ctx.strokeStyle = COLORS.guessEdge;
  ctx.lineWidth = 1.5;
  tracePolygon(ctx, snapshot.guess_polygon, t);
  ctx.fill();
  ctx.stroke();

  ctx.fillStyle = COLORS.robot;
  for (const [x, y, theta] of snapshot.robots) {
    drawRobot(ctx, t, x, y, theta);
  }

  ctx.fillStyle = COLORS.text;
  ctx.font = "12px sans-serif";
  const status = state.inputsEnabled
    ? "your turn: ← before / after →"
    : `phase: ${snapshot.phase}`;
  ctx.fillText(`k=${snapshot.k}  ${status}`, layout.margin, layout.height - 6);
}

/** Posterior over dictionary indices: full bars up to the wire limit,
 * top-k markers beyond it. Target gold, estimate red. */
export function renderPosterior(
  ctx: Draw2D,
  state: ViewState,
  layout: Layout
): void {
  ctx.clearRect(0, 0, layout.width, layout.height);
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, layout.width, layout.height);
  const snapshot = state.snapshot;
  if (!snapshot || !state.showPosterior) return;

  const entries: [number, number][] =
    snapshot.posterior !== null
      ? snapshot.posterior.map((a, i) => [i + 1, a] as [number, number])
      : snapshot.posterior_topk ?? [];
  if (!entries.length) return;

  const peak = Math.max(...entries.map(([, a]) => a), 1e-12);
  const slot = (layout.width - 2 * layout.margin) / entries.length;
  const maxH = layout.height - 2 * layout.margin;
  entries.forEach(([index, mass], i) => {
    const h = (mass / peak) * maxH;
    ctx.fillStyle =
      index === snapshot.target
        ? COLORS.barTarget
        : index === (snapshot.estimate ?? -1)
          ? COLORS.barEstimate
          : COLORS.barNeutral;
    ctx.fillRect(
      layout.margin + i * slot,
      layout.height - layout.margin - h,
      Math.max(1, slot - 1),
      h
    );
  });
}
