// Top-down 2D arena view. Field x runs left-to-right on screen, y up; one
// pixel scale fits the whole arena plus a margin. Draws straight from the
// latest state payload — no interpolation, no client-side simulation.

import type { StatePayload } from "./messages.js";

export interface ArenaDimensions {
  halfLength: number;
  halfWidth: number;
  goalHalfWidth: number;
  ballRadius: number;
  carRadius: number;
  padRadius: number;
}

export const ARENA_DIMENSIONS: ArenaDimensions = {
  halfLength: 60,
  halfWidth: 40,
  goalHalfWidth: 8,
  ballRadius: 2,
  carRadius: 1.5,
  padRadius: 3,
};

// The slice of CanvasRenderingContext2D the renderer touches; tests pass a
// recording stub, the browser passes the real thing.
export interface Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: CanvasTextAlign;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, start: number, end: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(angle: number): void;
}

export interface Viewport { width: number; height: number }

const MARGIN = 6; // arena units around the walls

export const TEAM_COLORS = ["#4da3ff", "#ff8a4d"] as const;

export interface WorldToScreen {
  scale: number;
  toX(x: number): number;
  toY(y: number): number;
}

export function worldToScreen(view: Viewport, dims: ArenaDimensions = ARENA_DIMENSIONS): WorldToScreen {
  const scale = Math.min(
    view.width / (2 * (dims.halfLength + MARGIN)),
    view.height / (2 * (dims.halfWidth + MARGIN)),
  );
  const cx = view.width / 2;
  const cy = view.height / 2;
  return {
    scale,
    toX: (x) => cx + x * scale,
    toY: (y) => cy - y * scale, // world y up, screen y down
  };
}

export function renderArena(
  ctx: Draw2D,
  state: StatePayload,
  view: Viewport,
  dims: ArenaDimensions = ARENA_DIMENSIONS,
): void {
  const m = worldToScreen(view, dims);
  ctx.clearRect(0, 0, view.width, view.height);

  // field + centre line
  ctx.fillStyle = "#163218";
  ctx.fillRect(m.toX(-dims.halfLength), m.toY(dims.halfWidth),
               2 * dims.halfLength * m.scale, 2 * dims.halfWidth * m.scale);
  ctx.strokeStyle = "#2e5d31";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(m.toX(0), m.toY(dims.halfWidth));
  ctx.lineTo(m.toX(0), m.toY(-dims.halfWidth));
  ctx.stroke();
  ctx.strokeRect(m.toX(-dims.halfLength), m.toY(dims.halfWidth),
                 2 * dims.halfLength * m.scale, 2 * dims.halfWidth * m.scale);

  // goal mouths (team 0 attacks +x, scores into the right-hand mouth)
  ctx.strokeStyle = "#e8e8e8";
  ctx.lineWidth = 3;
  for (const side of [-1, 1]) {
    ctx.beginPath();
    ctx.moveTo(m.toX(side * dims.halfLength), m.toY(dims.goalHalfWidth));
    ctx.lineTo(m.toX(side * dims.halfLength), m.toY(-dims.goalHalfWidth));
    ctx.stroke();
  }

  // boost pads
  for (const pad of state.pads) {
    const spot = padLocation(pad.pad_id, dims);
    ctx.fillStyle = pad.active ? "#d9c844" : "#3a3a2a";
    ctx.beginPath();
    ctx.arc(m.toX(spot.x), m.toY(spot.y), dims.padRadius * m.scale, 0, Math.PI * 2);
    ctx.fill();
  }

  // cars as heading wedges
  for (const car of state.cars) {
    const { x, y } = car.physics.location;
    const yaw = car.physics.rotation.yaw;
    ctx.save();
    ctx.translate(m.toX(x), m.toY(y));
    ctx.rotate(-yaw); // screen y is flipped
    ctx.fillStyle = TEAM_COLORS[car.team_id] ?? "#cccccc";
    const r = dims.carRadius * m.scale;
    ctx.beginPath();
    ctx.moveTo(1.8 * r, 0);
    ctx.lineTo(-r, 0.9 * r);
    ctx.lineTo(-r, -0.9 * r);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
  }

  // ball, lifted shadow-style when airborne
  const ball = state.ball.location;
  ctx.fillStyle = ball.z > 0.5 ? "#f5f5f5" : "#bfbfbf";
  ctx.beginPath();
  ctx.arc(m.toX(ball.x), m.toY(ball.y), dims.ballRadius * m.scale, 0, Math.PI * 2);
  ctx.fill();

  // scoreboard + clock
  const score0 = state.teams[0]?.score ?? 0;
  const score1 = state.teams[1]?.score ?? 0;
  ctx.fillStyle = "#ffffff";
  ctx.font = "16px monospace";
  ctx.textAlign = "center";
  ctx.fillText(`${score0} : ${score1}   ${formatClock(state.info.seconds_elapsed)}`,
               view.width / 2, 20);
}

// Pad layout mirrors the arena's spawn table: midfield pads at (±hl/2, 0),
// quarter-line pads at (±hl/4, ±5w/8), ids in spawn order.
export function padLocation(padId: number, dims: ArenaDimensions = ARENA_DIMENSIONS): { x: number; y: number } {
  const lx = dims.halfLength * 0.5;
  const mx = dims.halfLength * 0.25;
  const my = dims.halfWidth * 0.625;
  const spots = [
    { x: -lx, y: 0 }, { x: lx, y: 0 },
    { x: -mx, y: my }, { x: mx, y: -my },
    { x: -mx, y: -my }, { x: mx, y: my },
  ];
  return spots[padId] ?? { x: 0, y: 0 };
}

export function formatClock(secondsElapsed: number): string {
  const whole = Math.max(0, Math.floor(secondsElapsed));
  const minutes = Math.floor(whole / 60);
  const seconds = whole % 60;
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}
