// Two gamepad silhouettes side by side — pilot left, copilot right — with
// the elements backing currently-merged actions drawn as lit (white) shapes.

import type { RoleName } from "./messages.js";
import type { OverlayModel } from "./overlay.js";
import type { Draw2D, Viewport } from "./renderer.js";

// Element centres in silhouette-local coordinates (unit square).
export const ELEMENT_SPOTS: Record<string, { x: number; y: number; r: number }> = {
  LeftStick: { x: 0.26, y: 0.42, r: 0.09 },
  RightStick: { x: 0.62, y: 0.66, r: 0.09 },
  LeftTrigger: { x: 0.22, y: 0.10, r: 0.06 },
  RightTrigger: { x: 0.78, y: 0.10, r: 0.06 },
  LeftBumper: { x: 0.22, y: 0.22, r: 0.05 },
  RightBumper: { x: 0.78, y: 0.22, r: 0.05 },
  A: { x: 0.76, y: 0.50, r: 0.05 },
  B: { x: 0.84, y: 0.42, r: 0.05 },
  X: { x: 0.68, y: 0.42, r: 0.05 },
  Y: { x: 0.76, y: 0.34, r: 0.05 },
  Back: { x: 0.42, y: 0.40, r: 0.035 },
  Start: { x: 0.58, y: 0.40, r: 0.035 },
  DPadUp: { x: 0.38, y: 0.60, r: 0.035 },
  DPadDown: { x: 0.38, y: 0.72, r: 0.035 },
  DPadLeft: { x: 0.32, y: 0.66, r: 0.035 },
  DPadRight: { x: 0.44, y: 0.66, r: 0.035 },
  LeftThumb: { x: 0.26, y: 0.42, r: 0.03 },
  RightThumb: { x: 0.62, y: 0.66, r: 0.03 },
};

export function litElements(overlay: OverlayModel, role: RoleName): string[] {
  return Object.entries(overlay[role])
    .filter(([, value]) => value !== 0)
    .map(([element]) => element)
    .sort();
}

function drawSilhouette(
  ctx: Draw2D,
  overlay: OverlayModel,
  role: RoleName,
  left: number,
  top: number,
  size: number,
  label: string,
): void {
  ctx.strokeStyle = "#666666";
  ctx.lineWidth = 2;
  ctx.strokeRect(left, top, size, size * 0.75);

  ctx.fillStyle = "#aaaaaa";
  ctx.font = "12px monospace";
  ctx.textAlign = "center";
  ctx.fillText(label, left + size / 2, top + size * 0.75 + 16);

  const lit = new Set(litElements(overlay, role));
  for (const [element, spot] of Object.entries(ELEMENT_SPOTS)) {
    const cx = left + spot.x * size;
    const cy = top + spot.y * size * 0.75;
    ctx.beginPath();
    ctx.arc(cx, cy, spot.r * size, 0, Math.PI * 2);
    if (lit.has(element)) {
      ctx.fillStyle = "#ffffff";
      ctx.fill();
    } else {
      ctx.strokeStyle = "#555555";
      ctx.lineWidth = 1;
      ctx.stroke();
    }
  }
}

export function renderControllers(ctx: Draw2D, overlay: OverlayModel, view: Viewport): void {
  const gap = view.width * 0.04;
  const size = (view.width - 3 * gap) / 2;
  const top = view.height * 0.05;
  drawSilhouette(ctx, overlay, "pilot", gap, top, size, "pilot");
  drawSilhouette(ctx, overlay, "copilot", 2 * gap + size, top, size, "copilot");
}
