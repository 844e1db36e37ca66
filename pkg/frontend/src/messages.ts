// Wire types for the sharedpad session endpoint. Every WebSocket text
// message is one JSON line of the shape {"type": ..., "payload": ...}.

export type RoleName = "pilot" | "copilot";
export type AssignmentValue = "pilot" | "copilot" | "overlap";
export type Intensity = number | [number, number];

export interface Vec3 { x: number; y: number; z: number }
export interface Rotation { pitch: number; yaw: number; roll: number }

export interface Physics {
  location: Vec3;
  rotation: Rotation;
  velocity: Vec3;
  angular_velocity: Vec3;
}

export interface CarState {
  physics: Physics;
  team_id: number;
  demolished: boolean;
  ground_contact: boolean;
  jumped: boolean;
  boost: number;
  is_bot: boolean;
}

export interface PadState {
  pad_id: number;
  active: boolean;
  respawn_remaining: number;
}

export interface StatePayload {
  ball: Physics;
  cars: CarState[];
  teams: { team_id: number; score: number }[];
  info: { seconds_elapsed: number };
  pads: PadState[];
  ui: string;
  tick: number;
}

export interface FramePayload {
  tick: number;
  values: Record<string, number>;
  // contributing roles, only for actions somebody (even at value 0) touched
  roles: Record<string, RoleName[]>;
}

export interface SessionDescription {
  mode: string;
  label: string;
  tick_rate: number;
  sources: Record<RoleName, string>;
  mappings: Record<RoleName, Record<string, string>>;
  assignment: Record<string, AssignmentValue>;
  policies: Record<string, string>;
  presets: string[];
}

export interface WelcomePayload extends SessionDescription {
  role: RoleName;
}

export interface EventPayload { kind: string; team: number | null; tick: number }
export interface ConfigResultPayload { ok: boolean; violations: string[]; label: string | null }
export interface ResultPayload { scores: Record<string, number>; duration_seconds: number; warnings: number }

export type ServerMessage =
  | { type: "welcome"; payload: WelcomePayload }
  | { type: "state"; payload: StatePayload }
  | { type: "frame"; payload: FramePayload }
  | { type: "event"; payload: EventPayload }
  | { type: "config"; payload: SessionDescription }
  | { type: "config_result"; payload: ConfigResultPayload }
  | { type: "result"; payload: ResultPayload }
  | { type: "error"; payload: { message: string } };

export const SERVER_MESSAGE_TYPES = [
  "welcome", "state", "frame", "event", "config", "config_result", "result", "error",
] as const;

export interface ConfigPayload {
  mode?: string;
  pilot?: string;
  copilot?: string;
  opponent?: string;
  preset?: string;
  assignment?: Record<string, AssignmentValue>;
  policies?: Record<string, string>;
  mappings?: Partial<Record<RoleName, Record<string, string>>>;
  arena?: Record<string, number | boolean>;
  agent?: Record<string, number>;
}

export type ClientMessage =
  | { type: "hello"; payload: { role: RoleName } }
  | { type: "input"; payload: { element: string; intensity: Intensity; tick?: number } }
  | { type: "input"; payload: { states: Record<string, Intensity> } }
  | { type: "config"; payload: ConfigPayload };

export function encodeMessage(message: ClientMessage): string {
  return JSON.stringify(message);
}

export function decodeMessage(line: string): ServerMessage {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    throw new Error(`malformed message: ${line.slice(0, 120)}`);
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new Error("envelope must be a JSON object");
  }
  const type = (parsed as { type?: unknown }).type;
  if (typeof type !== "string") {
    throw new Error("envelope missing string 'type'");
  }
  if (!(SERVER_MESSAGE_TYPES as readonly string[]).includes(type)) {
    throw new Error(`unknown server message type '${type}'`);
  }
  return parsed as ServerMessage;
}
