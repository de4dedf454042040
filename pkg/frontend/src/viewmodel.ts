/**
 * Pure projection of server events into the console's view state.
 *
 * No simulation happens here: every field is derived from received events
 * only, so replaying a recorded stream always rebuilds the same ViewModel.
 */

import { Envelope, WorldSnapshotBody } from "./protocol.js";

export interface TranscriptEntry {
  kind: "phrase" | "robot" | "fused" | "cot" | "error" | "step";
  text: string;
  ts: number;
  gazedObject?: string | null;
}

export interface SpeechBubble {
  text: string;
  ts: number;
  durationMs: number;
}

export interface PointingRay {
  target: string | null;
  bearingDeg: number;
  ts: number;
  durationMs: number;
}

export interface Metrics {
  lastLatencyMs: number | null;
  promptTokens: number;
  completionTokens: number;
}

export interface ViewModel {
  connected: boolean;
  started: boolean;
  completed: boolean;
  world: WorldSnapshotBody | null;
  lamp: string;
  bubble: SpeechBubble | null;
  gesture: PointingRay | null;
  gestureName: string | null;
  transcript: TranscriptEntry[];
  step: { id: string; instruction: string } | null;
  condition: string;
  metrics: Metrics;
  errors: string[];
  showCot: boolean;
}

export function initialViewModel(): ViewModel {
  return {
    connected: false,
    started: false,
    completed: false,
    world: null,
    lamp: "listening",
    bubble: null,
    gesture: null,
    gestureName: null,
    transcript: [],
    step: null,
    condition: "scripted",
    metrics: { lastLatencyMs: null, promptTokens: 0, completionTokens: 0 },
    errors: [],
    showCot: false,
  };
}

function push(vm: ViewModel, entry: TranscriptEntry): void {
  vm.transcript.push(entry);
  if (vm.transcript.length > 200) {
    vm.transcript.splice(0, vm.transcript.length - 200);
  }
}

/** Applies one server event; mutates and returns the same ViewModel. */
export function applyEvent(vm: ViewModel, event: Envelope): ViewModel {
  const ts = event.ts ?? 0;
  const body = event.body as Record<string, any>;
  switch (event.type) {
    case "world_snapshot": {
      vm.world = body as unknown as WorldSnapshotBody;
      vm.started = true;
      vm.completed = Boolean(body.completed);
      vm.step = body.step ?? vm.step;
      vm.condition = body.condition ?? vm.condition;
      break;
    }
    case "lamp_state":
      vm.lamp = String(body.state);
      break;
    case "speak":
      vm.bubble = { text: String(body.text), ts, durationMs: Number(body.duration_ms) };
      push(vm, { kind: "robot", text: String(body.text), ts });
      break;
    case "gesture": {
      vm.gestureName = String(body.name);
      if (body.name === "point") {
        vm.gesture = {
          target: (body.target as string) ?? null,
          bearingDeg: Number(body.bearing_deg ?? 0),
          ts,
          durationMs: Number(body.duration_ms ?? 0),
        };
      }
      push(vm, {
        kind: "robot",
        text: body.target ? `[${body.name} -> ${body.target}]` : `[${body.name}]`,
        ts,
      });
      break;
    }
    case "phrase_echo":
      push(vm, { kind: "phrase", text: String(body.text), ts });
      break;
    case "fused_record_echo": {
      let gazed: string | null = null;
      try {
        const record = JSON.parse(String(body.serialized));
        gazed = record.gazed_object ? record.gazed_object.id : null;
      } catch {
        gazed = null;
      }
      push(vm, {
        kind: "fused",
        text: gazed ? `fused record (gaze: ${gazed})` : "fused record",
        ts,
        gazedObject: gazed,
      });
      break;
    }
    case "step_marker":
      vm.step = { id: String(body.step), instruction: String(body.instruction) };
      push(vm, { kind: "step", text: `Step ${body.step}: ${body.instruction}`, ts });
      break;
    case "metrics_tick":
      vm.metrics = {
        lastLatencyMs: Number(body.latency_ms ?? 0),
        promptTokens: Number(body.prompt_tokens ?? 0),
        completionTokens: Number(body.completion_tokens ?? 0),
      };
      if (body.cot) {
        push(vm, { kind: "cot", text: String(body.cot), ts });
      }
      break;
    case "error":
      vm.errors.push(String(body.reason ?? "unknown error"));
      if (vm.errors.length > 20) {
        vm.errors.splice(0, vm.errors.length - 20);
      }
      push(vm, { kind: "error", text: String(body.reason ?? "error"), ts });
      break;
    case "ack":
      if (body.stopped) {
        vm.completed = true;
      }
      break;
    default:
      break;
  }
  return vm;
}

export function applyAll(vm: ViewModel, events: Envelope[]): ViewModel {
  for (const event of events) {
    applyEvent(vm, event);
  }
  return vm;
}

/** Transcript entries a study participant would see (CoT hidden unless enabled). */
export function visibleTranscript(vm: ViewModel): TranscriptEntry[] {
  return vm.transcript.filter((e) => e.kind !== "cot" || vm.showCot);
}
