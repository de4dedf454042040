/** Console wiring: DOM controls, canvas interaction, websocket session. */

import { makeMessage } from "./protocol.js";
import { connect, Transport } from "./transport.js";
import { drawScene, objectAtCanvasPoint, sceneMapping } from "./scene.js";
import { applyEvent, initialViewModel, visibleTranscript } from "./viewmodel.js";

const vm = initialViewModel();
let transport: Transport | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const canvas = el<HTMLCanvasElement>("scene");
const ctx = canvas.getContext("2d");
if (!ctx) {
  throw new Error("canvas 2d context unavailable");
}

const startButton = el<HTMLButtonElement>("start");
const stopButton = el<HTMLButtonElement>("stop");
const conditionSelect = el<HTMLSelectElement>("condition");
const backendInput = el<HTMLInputElement>("backend");
const sendButton = el<HTMLButtonElement>("send");
const sayInput = el<HTMLInputElement>("say");
const pickButton = el<HTMLButtonElement>("pick");
const placeButton = el<HTMLButtonElement>("place");
const operatorToggle = el<HTMLInputElement>("operator-mode");
const cotToggle = el<HTMLInputElement>("cot-toggle");
const transcriptPane = el<HTMLDivElement>("transcript");
const stepBanner = el<HTMLDivElement>("step-banner");
const conditionBadge = el<HTMLSpanElement>("condition-badge");
const metricsFooter = el<HTMLDivElement>("metrics");
const connBanner = el<HTMLDivElement>("connection-banner");
const toast = el<HTMLDivElement>("toast");

function send(msg: ReturnType<typeof makeMessage>): void {
  transport?.send(msg);
}

function render(): void {
  drawScene(ctx!, vm);
  stepBanner.textContent = vm.step
    ? `Step ${vm.step.id}: ${vm.step.instruction}${vm.completed ? "  (task complete)" : ""}`
    : "No active step";
  conditionBadge.textContent = vm.condition;
  conditionBadge.className = `badge badge-${vm.condition}`;
  const m = vm.metrics;
  metricsFooter.textContent =
    `lamp: ${vm.lamp}  |  last reply: ${m.lastLatencyMs ?? "-"} ms  |  ` +
    `tokens: ${m.promptTokens}+${m.completionTokens}`;
  connBanner.style.display = vm.connected ? "none" : "block";
  conditionSelect.disabled = vm.started;
  backendInput.disabled = vm.started;
  startButton.disabled = vm.started || !vm.connected;
  stopButton.disabled = !vm.started;
  sendButton.disabled = !vm.started || sayInput.value.trim() === "";
  pickButton.disabled = !vm.started;
  placeButton.disabled = !vm.started;

  transcriptPane.innerHTML = "";
  for (const entry of visibleTranscript(vm).slice(-60)) {
    const row = document.createElement("div");
    row.className = `line line-${entry.kind}`;
    const who = { phrase: "you", robot: "robot", fused: "fusion",
                  cot: "cot", error: "error", step: "task" }[entry.kind];
    row.textContent = `[${who}] ${entry.text}`;
    transcriptPane.appendChild(row);
  }
  transcriptPane.scrollTop = transcriptPane.scrollHeight;

  const lastError = vm.errors[vm.errors.length - 1];
  if (lastError && vm.lamp === "error") {
    toast.textContent = lastError;
    toast.style.display = "block";
  } else {
    toast.style.display = "none";
  }
}

startButton.onclick = () => {
  send(makeMessage("start", {
    scenario: "corridor6",
    condition: conditionSelect.value,
    backend: conditionSelect.value === "scripted" ? "scripted" : backendInput.value,
    seed: 0,
  }));
};

stopButton.onclick = () => send(makeMessage("stop"));

conditionSelect.onchange = () => {
  if (!vm.started) {
    send(makeMessage("set_condition", { mode: conditionSelect.value }));
  }
};

sayInput.oninput = () => render();
sendButton.onclick = () => {
  const text = sayInput.value.trim();
  if (!text) {
    return;
  }
  send(makeMessage(operatorToggle.checked ? "operator_say" : "utterance", { text }));
  sayInput.value = "";
  render();
};
sayInput.onkeydown = (ev) => {
  if (ev.key === "Enter" && !sendButton.disabled) {
    sendButton.click();
  }
};

cotToggle.onchange = () => {
  vm.showCot = cotToggle.checked;
  render();
};

function nearestWithin<T extends { x: number; y: number }>(
  items: T[], x: number, y: number, radius: number,
): T | null {
  let best: T | null = null;
  let bestDist = radius;
  for (const item of items) {
    const dist = Math.hypot(item.x - x, item.y - y);
    if (dist <= bestDist) {
      best = item;
      bestDist = dist;
    }
  }
  return best;
}

pickButton.onclick = () => {
  if (!vm.world) {
    return;
  }
  const { user, objects } = vm.world;
  const candidate = nearestWithin(
    objects.filter((o) => o.movable), user.x, user.y, 1.2,
  );
  if (candidate) {
    send(makeMessage("pick", { object_id: candidate.id }));
  }
};

placeButton.onclick = () => {
  if (!vm.world) {
    return;
  }
  const { user, zones } = vm.world;
  const zone = nearestWithin(zones as { x: number; y: number; id: string }[],
                             user.x, user.y, 1.2);
  if (zone) {
    send(makeMessage("place", { zone_id: zone.id }));
  }
};

canvas.onclick = (ev: MouseEvent) => {
  if (!vm.world) {
    return;
  }
  const rect = canvas.getBoundingClientRect();
  const cx = (ev.clientX - rect.left) * (canvas.width / rect.width);
  const cy = (ev.clientY - rect.top) * (canvas.height / rect.height);
  const mapping = sceneMapping(canvas, vm.world.corridor);
  const hit = objectAtCanvasPoint(vm, mapping, cx, cy);
  if (hit) {
    send(makeMessage("gaze", { object_id: hit.id }));
    return;
  }
  const [wx, wy] = mapping.toWorld(cx, cy);
  if (wx >= 0 && wx <= vm.world.corridor.length
      && wy >= 0 && wy <= vm.world.corridor.width) {
    send(makeMessage("move", { x: Math.round(wx * 100) / 100,
                               y: Math.round(wy * 100) / 100 }));
  }
};

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/session`;
transport = connect(wsUrl, {
  onEvent(event) {
    applyEvent(vm, event);
    render();
  },
  onOpen() {
    vm.connected = true;
    render();
  },
  onClose() {
    vm.connected = false;
    render();
  },
});

render();
