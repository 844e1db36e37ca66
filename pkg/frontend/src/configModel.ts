// Editable session-config draft behind the config panel. Validation here
// mirrors the server's rules so violations render inline before a config
// message ever goes out; the server's verdict stays authoritative.

import type { AssignmentValue, ConfigPayload, RoleName } from "./messages.js";
import {
  ACTIONS,
  type ActionAssignment,
  type ActionName,
  ASSIGNMENT_PRESETS,
  allOverlap,
  DEFAULT_MAPPING,
  DEFAULT_POLICIES,
} from "./presets.js";

export type ModeName = "human_cooperation" | "partial_automation" | "hybrid";

// Bindings are kept as pair lists so a duplicated element is representable
// (and reported) instead of silently collapsing in an object literal.
export type BindingList = [element: string, action: string][];

export interface ConfigDraft {
  mode: ModeName;
  pilot: string;
  copilot: string;
  opponent: "chase" | "idle";
  assignment: ActionAssignment;
  policies: Record<ActionName, string>;
  mappings: Record<RoleName, BindingList>;
}

type ElementKind = "button" | "trigger" | "stick" | "button_pair";
type ValueKind = "binary" | "unipolar" | "bipolar";

const PAD_ELEMENTS: Record<string, ElementKind> = {
  A: "button", B: "button", X: "button", Y: "button",
  LeftBumper: "button", RightBumper: "button", Start: "button", Back: "button",
  DPadUp: "button", DPadDown: "button", DPadLeft: "button", DPadRight: "button",
  LeftThumb: "button", RightThumb: "button",
  LeftTrigger: "trigger", RightTrigger: "trigger",
  LeftStick: "stick", RightStick: "stick",
};

const ACTION_KINDS: Record<ActionName, ValueKind> = {
  Steer: "bipolar", Accelerate: "unipolar", Brake: "unipolar",
  Jump: "binary", Boost: "binary", Handbrake: "binary",
};

const KIND_COMPATIBILITY: Record<ValueKind, ElementKind[]> = {
  binary: ["button"],
  unipolar: ["trigger", "button"],
  bipolar: ["stick", "button_pair"],
};

const SOURCE_PATTERN = /^(idle|remote(:[\w-]+)?|local(:[\w-]+)?|script:.+|agent:(chase|idle))$/;
const POLICY_PATTERN = /^(binary|average|select:(pilot|copilot)|override:(always|never|ball_in_own_half|low_fuel))$/;

function defaultBindings(): BindingList {
  return Object.entries(DEFAULT_MAPPING);
}

// Matches the server's out-of-the-box session: remote pilot, chase-agent
// copilot, every action shared, stock mapping on both silhouettes.
export function initialDraft(): ConfigDraft {
  return {
    mode: "partial_automation",
    pilot: "remote",
    copilot: "agent:chase",
    opponent: "chase",
    assignment: allOverlap(),
    policies: { ...DEFAULT_POLICIES },
    mappings: { pilot: defaultBindings(), copilot: defaultBindings() },
  };
}

export function applyPreset(draft: ConfigDraft, name: string): ConfigDraft {
  const preset = ASSIGNMENT_PRESETS[name];
  if (!preset) throw new Error(`unknown preset '${name}'`);
  return { ...draft, assignment: { ...preset } };
}

function sourceKind(spec: string): "idle" | "human" | "agent" | "invalid" {
  if (!SOURCE_PATTERN.test(spec)) return "invalid";
  if (spec === "idle") return "idle";
  if (spec.startsWith("agent:")) return "agent";
  return "human";
}

function elementSpecKind(spec: string): ElementKind | undefined {
  if (spec.includes("+")) {
    const parts = spec.split("+").map((p) => p.trim());
    if (parts.length !== 2) return undefined;
    return parts.every((p) => PAD_ELEMENTS[p] === "button") ? "button_pair" : undefined;
  }
  return PAD_ELEMENTS[spec];
}

export function validateDraft(draft: ConfigDraft): string[] {
  const violations: string[] = [];

  const kinds = { pilot: sourceKind(draft.pilot), copilot: sourceKind(draft.copilot) };
  for (const role of ["pilot", "copilot"] as const) {
    if (kinds[role] === "invalid") {
      violations.push(`${role}: unknown source '${draft[role]}'`);
    }
  }
  const humans = Object.values(kinds).filter((k) => k === "human").length;
  const agents = Object.values(kinds).filter((k) => k === "agent").length;
  if (humans + agents === 0) violations.push("no input sources configured (both roles idle)");
  if (draft.mode === "partial_automation" && agents < 1) {
    violations.push("partial_automation needs at least one agent source");
  }
  if (draft.mode === "human_cooperation" && humans < 2) {
    violations.push("human_cooperation needs two human sources");
  }
  if (draft.mode === "hybrid" && (humans < 1 || agents < 1)) {
    violations.push("hybrid needs a human and an agent source");
  }

  for (const role of ["pilot", "copilot"] as const) {
    const seen = new Set<string>();
    for (const [element, action] of draft.mappings[role]) {
      if (seen.has(element)) {
        violations.push(`mapping.${role}: element '${element}' mapped twice`);
      }
      seen.add(element);
      const elementKind = elementSpecKind(element);
      if (elementKind === undefined) {
        violations.push(`mapping.${role}: unknown element '${element}'`);
        continue;
      }
      const actionKind = ACTION_KINDS[action as ActionName];
      if (actionKind === undefined) {
        violations.push(`mapping.${role}: unknown action '${action}'`);
        continue;
      }
      if (!KIND_COMPATIBILITY[actionKind].includes(elementKind)) {
        violations.push(
          `mapping.${role}: ${elementKind} element '${element}' cannot drive ` +
          `${actionKind} action '${action}'`,
        );
      }
    }
  }

  for (const action of ACTIONS) {
    if (!["pilot", "copilot", "overlap"].includes(draft.assignment[action])) {
      violations.push(`assignment.${action}: expected pilot/copilot/overlap`);
    }
    if (!POLICY_PATTERN.test(draft.policies[action])) {
      violations.push(`policies.${action}: malformed policy '${draft.policies[action]}'`);
    }
  }

  return violations;
}

export function draftToPayload(draft: ConfigDraft): ConfigPayload {
  const mappings: Partial<Record<RoleName, Record<string, string>>> = {};
  for (const role of ["pilot", "copilot"] as const) {
    mappings[role] = Object.fromEntries(draft.mappings[role]);
  }
  return {
    mode: draft.mode,
    pilot: draft.pilot,
    copilot: draft.copilot,
    opponent: draft.opponent,
    assignment: { ...draft.assignment } as Record<string, AssignmentValue>,
    policies: { ...draft.policies },
    mappings,
  };
}

// Session descriptions arrive with mappings as plain objects; fold them back
// into a draft when adopting the server's current config as the edit base.
export function draftFromDescription(description: {
  mode: string;
  sources: Record<RoleName, string>;
  mappings: Record<RoleName, Record<string, string>>;
  assignment: Record<string, AssignmentValue>;
  policies: Record<string, string>;
}): ConfigDraft {
  const draft = initialDraft();
  draft.mode = description.mode as ModeName;
  draft.pilot = description.sources.pilot;
  draft.copilot = description.sources.copilot;
  draft.assignment = { ...draft.assignment, ...description.assignment };
  draft.policies = { ...draft.policies, ...description.policies };
  draft.mappings = {
    pilot: Object.entries(description.mappings.pilot),
    copilot: Object.entries(description.mappings.copilot),
  };
  return draft;
}
