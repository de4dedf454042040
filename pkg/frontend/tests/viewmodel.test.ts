import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { Envelope } from "../src/protocol.js";
import {
  applyAll, applyEvent, initialViewModel, visibleTranscript,
} from "../src/viewmodel.js";
import { objectAtCanvasPoint, sceneMapping } from "../src/scene.js";

const here = dirname(fileURLToPath(import.meta.url));
const recorded: Envelope[] = JSON.parse(
  readFileSync(join(here, "fixtures", "session_events.json"), "utf-8"),
);

function replay() {
  return applyAll(initialViewModel(), recorded);
}

describe("viewmodel projection of a recorded session", () => {
  it("shows the gazed object from the fused record echo", () => {
    const vm = replay();
    const fused = vm.transcript.filter((e) => e.kind === "fused");
    expect(fused.length).toBeGreaterThan(0);
    expect(fused[fused.length - 1].gazedObject).toBe("box_front");
    expect(fused[fused.length - 1].text).toContain("box_front");
  });

  it("keeps the user phrase and the robot reply in the transcript", () => {
    const vm = replay();
    const kinds = vm.transcript.map((e) => e.kind);
    expect(kinds).toContain("phrase");
    expect(kinds).toContain("robot");
    const phrase = vm.transcript.find((e) => e.kind === "phrase");
    expect(phrase?.text).toBe("this one?");
  });

  it("records the pointing ray with target and bearing", () => {
    const vm = replay();
    expect(vm.gesture).not.toBeNull();
    expect(vm.gesture?.target).toBe("forks");
    expect(vm.gesture?.bearingDeg).toBeCloseTo(180.0, 5);
  });

  it("tracks lamp state, step banner, and metrics", () => {
    const vm = replay();
    expect(["listening", "thinking", "success", "error"]).toContain(vm.lamp);
    expect(vm.step?.id).toBe("I");
    expect(vm.metrics.promptTokens).toBe(0); // scripted condition
    expect(vm.world?.gaze_target).toBe("box_front");
  });

  it("is deterministic: replaying the stream rebuilds an identical ViewModel", () => {
    const a = replay();
    const b = replay();
    expect(JSON.stringify(a)).toBe(JSON.stringify(b));
  });
});

describe("viewmodel event handling", () => {
  it("hides chain-of-thought entries unless the debug toggle is on", () => {
    const vm = initialViewModel();
    applyEvent(vm, {
      v: 1, type: "metrics_tick", ts: 5,
      body: { latency_ms: 3, prompt_tokens: 10, completion_tokens: 4, cot: "reasoning here" },
    });
    expect(visibleTranscript(vm).some((e) => e.kind === "cot")).toBe(false);
    vm.showCot = true;
    expect(visibleTranscript(vm).some((e) => e.kind === "cot")).toBe(true);
  });

  it("collects error toasts", () => {
    const vm = initialViewModel();
    applyEvent(vm, { v: 1, type: "error", ts: 1, body: { reason: "nope" } });
    expect(vm.errors).toEqual(["nope"]);
    expect(vm.transcript[0].kind).toBe("error");
  });

  it("caps the transcript length", () => {
    const vm = initialViewModel();
    for (let i = 0; i < 250; i += 1) {
      applyEvent(vm, { v: 1, type: "speak", ts: i, body: { text: `t${i}`, duration_ms: 1 } });
    }
    expect(vm.transcript.length).toBe(200);
    expect(vm.transcript[vm.transcript.length - 1].text).toBe("t249");
  });

  it("marks completion from the stop ack", () => {
    const vm = initialViewModel();
    applyEvent(vm, { v: 1, type: "ack", ts: 1, body: { stopped: true, status: "aborted" } });
    expect(vm.completed).toBe(true);
  });
});

describe("scene mapping", () => {
  it("round-trips canvas and world coordinates", () => {
    const mapping = sceneMapping({ width: 860, height: 420 },
                                 { width: 5, length: 12 });
    const [cx, cy] = mapping.toCanvas(7.7, 3.9);
    const [wx, wy] = mapping.toWorld(cx, cy);
    expect(wx).toBeCloseTo(7.7, 9);
    expect(wy).toBeCloseTo(3.9, 9);
  });

  it("click hit-testing finds the box under the cursor", () => {
    const vm = replay();
    const mapping = sceneMapping({ width: 860, height: 420 },
                                 vm.world!.corridor);
    const box = vm.world!.objects.find((o) => o.id === "box_front")!;
    const [cx, cy] = mapping.toCanvas(box.x, box.y);
    const hit = objectAtCanvasPoint(vm, mapping, cx, cy);
    expect(hit?.id).toBe("box_front");
  });

  it("click hit-testing returns null on open floor", () => {
    const vm = replay();
    const mapping = sceneMapping({ width: 860, height: 420 },
                                 vm.world!.corridor);
    const [cx, cy] = mapping.toCanvas(5.5, 1.1);
    expect(objectAtCanvasPoint(vm, mapping, cx, cy)).toBeNull();
  });
});
