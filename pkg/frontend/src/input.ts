// Input capture: keyboard fallback (arrows drive the stick, configurable
// keys drive buttons and pedals) and standard-gamepad pass-through. Pure
// state-set -> element-states functions; the capture loop lives in main.

import type { Intensity } from "./messages.js";

export interface KeyboardBindings {
  buttons: Record<string, string>;   // KeyboardEvent.code -> button element
  pedals: Record<string, string>;    // code -> trigger element (full press)
}

export const DEFAULT_KEYBOARD: KeyboardBindings = {
  buttons: { KeyZ: "A", KeyX: "B", KeyC: "X" },
  pedals: { ArrowUp: "RightTrigger", ArrowDown: "LeftTrigger" },
};

// Left/right arrows deflect the stick; every bound element reports a state
// each call so releasing keys sends explicit neutrals.
export function keysToStates(
  pressed: ReadonlySet<string>,
  bindings: KeyboardBindings = DEFAULT_KEYBOARD,
): Record<string, Intensity> {
  const states: Record<string, Intensity> = {};
  const x = (pressed.has("ArrowRight") ? 1 : 0) - (pressed.has("ArrowLeft") ? 1 : 0);
  states["LeftStick"] = [x, 0];
  for (const [code, element] of Object.entries(bindings.pedals)) {
    states[element] = pressed.has(code) ? 1 : 0;
  }
  for (const [code, element] of Object.entries(bindings.buttons)) {
    states[element] = pressed.has(code) ? 1 : 0;
  }
  return states;
}

export class KeyTracker {
  private pressed = new Set<string>();

  keydown(code: string): void { this.pressed.add(code); }
  keyup(code: string): void { this.pressed.delete(code); }
  clear(): void { this.pressed.clear(); }

  states(bindings: KeyboardBindings = DEFAULT_KEYBOARD): Record<string, Intensity> {
    return keysToStates(this.pressed, bindings);
  }
}

// Shape of navigator.getGamepads() entries we consume (standard mapping).
export interface GamepadSnapshot {
  axes: ReadonlyArray<number>;
  buttons: ReadonlyArray<{ value: number; pressed: boolean }>;
}

const STANDARD_BUTTONS: [index: number, element: string][] = [
  [0, "A"], [1, "B"], [2, "X"], [3, "Y"],
  [4, "LeftBumper"], [5, "RightBumper"],
  [8, "Back"], [9, "Start"],
  [10, "LeftThumb"], [11, "RightThumb"],
  [12, "DPadUp"], [13, "DPadDown"], [14, "DPadLeft"], [15, "DPadRight"],
];

export function gamepadToStates(pad: GamepadSnapshot): Record<string, Intensity> {
  const states: Record<string, Intensity> = {
    LeftStick: [pad.axes[0] ?? 0, pad.axes[1] ?? 0],
    RightStick: [pad.axes[2] ?? 0, pad.axes[3] ?? 0],
    // analog triggers pass through untouched
    LeftTrigger: pad.buttons[6]?.value ?? 0,
    RightTrigger: pad.buttons[7]?.value ?? 0,
  };
  for (const [index, element] of STANDARD_BUTTONS) {
    states[element] = pad.buttons[index]?.pressed ? 1 : 0;
  }
  return states;
}

// Only ship changes: diff against the previously sent snapshot.
export function changedStates(
  current: Record<string, Intensity>,
  previous: Record<string, Intensity>,
): Record<string, Intensity> {
  const changed: Record<string, Intensity> = {};
  for (const [element, value] of Object.entries(current)) {
    const before = previous[element];
    const same = Array.isArray(value) && Array.isArray(before)
      ? value[0] === before[0] && value[1] === before[1]
      : value === before;
    if (!same) changed[element] = value;
  }
  return changed;
}
