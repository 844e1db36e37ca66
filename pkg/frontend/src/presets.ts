// The six arena actions, the stock wheel-style mapping the UI starts from,
// and the thirteen action subdivisions selectable in the config editor.
// These mirror the server's built-ins; the config-parity integration test
// round-trips every preset through the live server's validator.

import type { AssignmentValue, RoleName } from "./messages.js";

export const ACTIONS = [
  "Steer", "Accelerate", "Brake", "Jump", "Boost", "Handbrake",
] as const;

export type ActionName = (typeof ACTIONS)[number];

export type ActionAssignment = Record<ActionName, AssignmentValue>;

export const DEFAULT_MAPPING: Record<string, ActionName> = {
  LeftStick: "Steer",
  RightTrigger: "Accelerate",
  LeftTrigger: "Brake",
  A: "Jump",
  B: "Boost",
  X: "Handbrake",
};

const P = "pilot";
const C = "copilot";
const O = "overlap";

function subdivision(
  steer: AssignmentValue, accelerate: AssignmentValue, brake: AssignmentValue,
  jump: AssignmentValue, boost: AssignmentValue, handbrake: AssignmentValue,
): ActionAssignment {
  return { Steer: steer, Accelerate: accelerate, Brake: brake,
           Jump: jump, Boost: boost, Handbrake: handbrake };
}

export const ASSIGNMENT_PRESETS: Record<string, ActionAssignment> = {
  P1: subdivision(P, P, C, O, P, C),
  P2: subdivision(P, P, P, C, C, C),
  P3: subdivision(O, P, P, C, C, C),
  P4: subdivision(P, P, C, C, P, C),
  P5: subdivision(P, P, P, O, C, P),
  P6: subdivision(P, C, C, C, C, C),
  P7: subdivision(P, P, P, C, P, P),
  P8: subdivision(P, P, C, C, C, C),
  P9: subdivision(P, C, C, C, C, C),
  P10: subdivision(P, P, P, C, C, C),
  P11: subdivision(P, C, C, P, P, C),
  P12: subdivision(C, C, C, P, P, C),
  P13: subdivision(C, P, C, C, P, C),
};

export const PRESET_NAMES = Object.keys(ASSIGNMENT_PRESETS);

export const DEFAULT_POLICIES: Record<ActionName, string> = {
  Steer: "average",
  Accelerate: "average",
  Brake: "average",
  Jump: "binary",
  Boost: "binary",
  Handbrake: "binary",
};

export function allOverlap(): ActionAssignment {
  return subdivision(O, O, O, O, O, O);
}

export function defaultMappings(): Record<RoleName, Record<string, string>> {
  return { pilot: { ...DEFAULT_MAPPING }, copilot: { ...DEFAULT_MAPPING } };
}
