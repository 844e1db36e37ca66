// Browser entry point: wires the socket client, input capture, the arena
// canvas, the dual-controller overlay, and the config panel together.

import { CockpitClient, type SocketLike } from "./net.js";
import { changedStates, gamepadToStates, KeyTracker } from "./input.js";
import { renderArena } from "./renderer.js";
import { renderControllers } from "./controllerView.js";
import { applyPreset, draftToPayload, validateDraft } from "./configModel.js";
import type { Intensity, RoleName } from "./messages.js";
import { PRESET_NAMES } from "./presets.js";

const INPUT_SEND_HZ = 120;

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function startCockpit(): void {
  const params = new URLSearchParams(location.search);
  const role = (params.get("role") === "copilot" ? "copilot" : "pilot") as RoleName;
  const url = params.get("server") ?? `ws://${location.hostname || "127.0.0.1"}:8765`;

  const arenaCanvas = byId<HTMLCanvasElement>("arena");
  const padsCanvas = byId<HTMLCanvasElement>("controllers");
  const banner = byId<HTMLDivElement>("banner");
  const verdict = byId<HTMLDivElement>("config-verdict");
  const presetSelect = byId<HTMLSelectElement>("preset");
  const submitButton = byId<HTMLButtonElement>("submit-config");

  for (const name of PRESET_NAMES) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    presetSelect.appendChild(option);
  }

  const client = new CockpitClient(() => new WebSocket(url) as unknown as SocketLike);
  client.onUpdate = (view) => {
    banner.style.display = view.showReconnectBanner ? "block" : "none";
    if (view.configResult) {
      verdict.textContent = view.configResult.ok
        ? `accepted (${view.configResult.label}) — applies next match`
        : view.configResult.violations.join("; ");
    }
  };
  client.connect(role);

  // input capture, decoupled from rendering
  const keys = new KeyTracker();
  window.addEventListener("keydown", (e) => { keys.keydown(e.code); });
  window.addEventListener("keyup", (e) => { keys.keyup(e.code); });
  window.addEventListener("blur", () => { keys.clear(); });

  let lastSent: Record<string, Intensity> = {};
  setInterval(() => {
    const pad = navigator.getGamepads?.()[0];
    const states = pad ? gamepadToStates(pad) : keys.states();
    const delta = changedStates(states, lastSent);
    client.sendStates(delta);
    lastSent = { ...lastSent, ...delta };
  }, 1000 / INPUT_SEND_HZ);

  submitButton.addEventListener("click", () => {
    let draft = client.view.draft;
    if (presetSelect.value) draft = applyPreset(draft, presetSelect.value);
    const violations = validateDraft(draft);
    if (violations.length > 0) {
      verdict.textContent = violations.join("; ");
      return;
    }
    client.view.draft = draft;
    client.submitConfig(draftToPayload(draft));
  });

  const arenaCtx = arenaCanvas.getContext("2d");
  const padsCtx = padsCanvas.getContext("2d");
  function paint(): void {
    if (arenaCtx && client.view.state) {
      renderArena(arenaCtx, client.view.state,
                  { width: arenaCanvas.width, height: arenaCanvas.height });
    }
    if (padsCtx) {
      padsCtx.clearRect(0, 0, padsCanvas.width, padsCanvas.height);
      renderControllers(padsCtx, client.view.overlay,
                        { width: padsCanvas.width, height: padsCanvas.height });
    }
    requestAnimationFrame(paint);
  }
  requestAnimationFrame(paint);
}

if (typeof document !== "undefined" && document.getElementById("arena")) {
  startCockpit();
}
