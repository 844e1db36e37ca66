// WebSocket client of the session endpoint. Holds the whole client-side
// view: connection state, assigned role, latest world snapshot, overlay
// model, and the editable config draft. Game truth only ever comes off the
// wire — reloading mid-match resumes rendering identically from the stream.

import {
  type ClientMessage,
  decodeMessage,
  encodeMessage,
  type ConfigPayload,
  type ConfigResultPayload,
  type EventPayload,
  type FramePayload,
  type Intensity,
  type ResultPayload,
  type RoleName,
  type ServerMessage,
  type SessionDescription,
  type StatePayload,
} from "./messages.js";
import { type ConfigDraft, draftFromDescription, initialDraft } from "./configModel.js";
import { emptyOverlay, frameToOverlay, type OverlayModel } from "./overlay.js";

// Minimal surface shared by the browser WebSocket and the `ws` package.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((event: unknown) => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: ((event: unknown) => void) | null;
  onerror: ((event: unknown) => void) | null;
}

export type ConnectionState = "connecting" | "open" | "closed";

export interface ClientSessionView {
  connection: ConnectionState;
  role: RoleName | null;
  description: SessionDescription | null;
  state: StatePayload | null;
  frame: FramePayload | null;
  overlay: OverlayModel;
  draft: ConfigDraft;
  configResult: ConfigResultPayload | null;
  result: ResultPayload | null;
  events: EventPayload[];
  errors: string[];
  showReconnectBanner: boolean;
}

export function freshView(): ClientSessionView {
  return {
    connection: "connecting",
    role: null,
    description: null,
    state: null,
    frame: null,
    overlay: emptyOverlay(),
    draft: initialDraft(),
    configResult: null,
    result: null,
    events: [],
    errors: [],
    showReconnectBanner: false,
  };
}

const EVENT_BACKLOG = 32;

export class CockpitClient {
  readonly view: ClientSessionView = freshView();
  onUpdate: ((view: ClientSessionView) => void) | null = null;

  private socket: SocketLike | null = null;

  constructor(private readonly openSocket: () => SocketLike) {}

  connect(role: RoleName): void {
    const socket = this.openSocket();
    this.socket = socket;
    this.view.connection = "connecting";
    this.view.showReconnectBanner = false;
    socket.onopen = () => {
      this.view.connection = "open";
      this.send({ type: "hello", payload: { role } });
      this.changed();
    };
    socket.onmessage = (event) => {
      this.receive(String(event.data));
    };
    socket.onerror = () => { /* onclose follows; banner handled there */ };
    socket.onclose = () => {
      this.view.connection = "closed";
      this.view.showReconnectBanner = true;
      this.changed();
    };
    this.changed();
  }

  close(): void {
    this.socket?.close();
  }

  // Input while disconnected is dropped on the floor by design.
  sendStates(states: Record<string, Intensity>): void {
    if (this.view.connection !== "open") return;
    if (Object.keys(states).length === 0) return;
    this.send({ type: "input", payload: { states } });
  }

  sendElement(element: string, intensity: Intensity): void {
    if (this.view.connection !== "open") return;
    this.send({ type: "input", payload: { element, intensity } });
  }

  submitConfig(payload: ConfigPayload): void {
    this.view.configResult = null;
    this.send({ type: "config", payload });
  }

  private send(message: ClientMessage): void {
    this.socket?.send(encodeMessage(message));
  }

  private receive(line: string): void {
    let message: ServerMessage;
    try {
      message = decodeMessage(line);
    } catch (error) {
      this.view.errors.push(String(error));
      this.changed();
      return;
    }
    this.apply(message);
    this.changed();
  }

  private apply(message: ServerMessage): void {
    const view = this.view;
    switch (message.type) {
      case "welcome":
        view.role = message.payload.role;
        view.description = message.payload;
        view.draft = draftFromDescription(message.payload);
        break;
      case "config":
        view.description = message.payload;
        view.overlay = emptyOverlay();
        view.result = null;
        break;
      case "state":
        view.state = message.payload;
        break;
      case "frame":
        view.frame = message.payload;
        if (view.description) {
          view.overlay = frameToOverlay(message.payload, view.description.mappings);
        }
        break;
      case "event":
        view.events.push(message.payload);
        if (view.events.length > EVENT_BACKLOG) view.events.shift();
        break;
      case "config_result":
        view.configResult = message.payload;
        break;
      case "result":
        view.result = message.payload;
        break;
      case "error":
        view.errors.push(message.payload.message);
        break;
    }
  }

  private changed(): void {
    this.onUpdate?.(this.view);
  }
}
