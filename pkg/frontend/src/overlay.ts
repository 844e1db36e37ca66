// Dual-controller overlay model: which elements light up on the pilot and
// copilot silhouettes, derived purely from received frame messages (no
// local prediction). An element lights up when its bound action carries a
// non-zero merged value and the role is among that action's contributors;
// per-role raw values are not on the wire, so a pair cancelling each other
// out (e.g. averaged opposite steer) renders dark by construction.

import type { FramePayload, RoleName } from "./messages.js";

export interface OverlayModel {
  pilot: Record<string, number>;   // element id -> merged intensity
  copilot: Record<string, number>;
}

export function emptyOverlay(): OverlayModel {
  return { pilot: {}, copilot: {} };
}

export function frameToOverlay(
  frame: FramePayload,
  mappings: Record<RoleName, Record<string, string>>,
): OverlayModel {
  const overlay = emptyOverlay();
  for (const role of ["pilot", "copilot"] as const) {
    for (const [element, action] of Object.entries(mappings[role])) {
      const value = frame.values[action] ?? 0;
      if (value === 0) continue;
      if (!(frame.roles[action] ?? []).includes(role)) continue;
      overlay[role][element] = value;
    }
  }
  return overlay;
}

export function activeElements(overlay: OverlayModel, role: RoleName): string[] {
  return Object.keys(overlay[role]).sort();
}
