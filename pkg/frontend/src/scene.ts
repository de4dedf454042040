/** Top-down 2-D canvas rendering of the corridor, plus canvas<->world mapping. */

import { ViewModel } from "./viewmodel.js";
import { WorldObjectView } from "./protocol.js";

const MARGIN = 24;

const LAMP_COLORS: Record<string, string> = {
  listening: "#35a853",
  thinking: "#f5a623",
  success: "#3b82f6",
  error: "#e0245e",
};

export interface SceneMapping {
  toCanvas(x: number, y: number): [number, number];
  toWorld(cx: number, cy: number): [number, number];
  scale: number;
}

export function sceneMapping(
  canvas: { width: number; height: number },
  corridor: { width: number; length: number },
): SceneMapping {
  const sx = (canvas.width - 2 * MARGIN) / corridor.length;
  const sy = (canvas.height - 2 * MARGIN) / corridor.width;
  const scale = Math.min(sx, sy);
  const toCanvas = (x: number, y: number): [number, number] => [
    MARGIN + x * scale,
    canvas.height - MARGIN - y * scale,
  ];
  const toWorld = (cx: number, cy: number): [number, number] => [
    (cx - MARGIN) / scale,
    (canvas.height - MARGIN - cy) / scale,
  ];
  return { toCanvas, toWorld, scale };
}

export function objectAtCanvasPoint(
  vm: ViewModel,
  mapping: SceneMapping,
  cx: number,
  cy: number,
): WorldObjectView | null {
  if (!vm.world) {
    return null;
  }
  let best: WorldObjectView | null = null;
  let bestDist = Infinity;
  for (const obj of vm.world.objects) {
    const [ox, oy] = mapping.toCanvas(obj.x, obj.y);
    const dist = Math.hypot(ox - cx, oy - cy);
    const hitRadius = Math.max(10, obj.radius * mapping.scale);
    if (dist <= hitRadius && dist < bestDist) {
      best = obj;
      bestDist = dist;
    }
  }
  return best;
}

export function drawScene(ctx: CanvasRenderingContext2D, vm: ViewModel): void {
  const canvas = ctx.canvas;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!vm.world) {
    ctx.fillStyle = "#777";
    ctx.font = "14px sans-serif";
    ctx.fillText("No session. Press Start.", 20, 30);
    return;
  }
  const world = vm.world;
  const mapping = sceneMapping(canvas, world.corridor);

  // Corridor floor.
  const [x0, y0] = mapping.toCanvas(0, world.corridor.width);
  ctx.fillStyle = "#14181f";
  ctx.strokeStyle = "#3a4354";
  ctx.lineWidth = 2;
  const floorW = world.corridor.length * mapping.scale;
  const floorH = world.corridor.width * mapping.scale;
  ctx.fillRect(x0, y0, floorW, floorH);
  ctx.strokeRect(x0, y0, floorW, floorH);

  // Zones.
  for (const zone of world.zones) {
    const [zx, zy] = mapping.toCanvas(zone.x, zone.y);
    ctx.beginPath();
    ctx.setLineDash([4, 4]);
    ctx.strokeStyle = zone.kind === "container" ? "#7aa2f7" : "#4d5a73";
    ctx.arc(zx, zy, zone.radius * mapping.scale, 0, Math.PI * 2);
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = "#5a6a85";
    ctx.font = "10px sans-serif";
    ctx.fillText(zone.id, zx + 4, zy - 4);
  }

  const robot = world.objects.find((o) => o.category === "robot");

  // Pointing ray from the robot along the reported bearing.
  if (vm.gesture && robot) {
    const [rx, ry] = mapping.toCanvas(robot.x, robot.y);
    const theta = (vm.gesture.bearingDeg * Math.PI) / 180;
    const len = 6 * mapping.scale;
    ctx.beginPath();
    ctx.strokeStyle = "#f5a623";
    ctx.lineWidth = 2;
    ctx.moveTo(rx, ry);
    ctx.lineTo(rx + len * Math.cos(theta), ry - len * Math.sin(theta));
    ctx.stroke();
  }

  // Objects.
  for (const obj of world.objects) {
    const [ox, oy] = mapping.toCanvas(obj.x, obj.y);
    const radius = Math.max(3, obj.radius * mapping.scale);
    ctx.beginPath();
    ctx.fillStyle = obj.category === "robot" ? "#e0245e" : obj.color ?? "#9aa5b1";
    ctx.arc(ox, oy, radius, 0, Math.PI * 2);
    ctx.fill();
    if (obj.id === world.gaze_target) {
      ctx.beginPath();
      ctx.strokeStyle = "#35e8a8";
      ctx.lineWidth = 2;
      ctx.arc(ox, oy, radius + 4, 0, Math.PI * 2);
      ctx.stroke();
    }
    ctx.fillStyle = "#c6cdd8";
    ctx.font = "10px sans-serif";
    ctx.fillText(obj.id, ox + radius + 2, oy + 3);
  }

  // Gaze ray user -> gazed object.
  if (world.gaze_target) {
    const target = world.objects.find((o) => o.id === world.gaze_target);
    if (target) {
      const [ux, uy] = mapping.toCanvas(world.user.x, world.user.y);
      const [gx, gy] = mapping.toCanvas(target.x, target.y);
      ctx.beginPath();
      ctx.setLineDash([2, 4]);
      ctx.strokeStyle = "#35e8a8";
      ctx.lineWidth = 1;
      ctx.moveTo(ux, uy);
      ctx.lineTo(gx, gy);
      ctx.stroke();
      ctx.setLineDash([]);
    }
  }

  // User avatar: triangle facing the heading.
  const [ux, uy] = mapping.toCanvas(world.user.x, world.user.y);
  const heading = (world.user.heading * Math.PI) / 180;
  ctx.save();
  ctx.translate(ux, uy);
  ctx.rotate(-heading);
  ctx.beginPath();
  ctx.fillStyle = "#35e8a8";
  ctx.moveTo(10, 0);
  ctx.lineTo(-6, 6);
  ctx.lineTo(-6, -6);
  ctx.closePath();
  ctx.fill();
  ctx.restore();
  if (world.user.held_object) {
    ctx.fillStyle = "#f7d154";
    ctx.font = "10px sans-serif";
    ctx.fillText(`holding ${world.user.held_object}`, ux + 12, uy - 10);
  }

  // Lamp chip.
  ctx.beginPath();
  ctx.fillStyle = LAMP_COLORS[vm.lamp] ?? "#777";
  ctx.arc(canvas.width - 30, 26, 9, 0, Math.PI * 2);
  ctx.fill();
  ctx.fillStyle = "#c6cdd8";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "right";
  ctx.fillText(vm.lamp, canvas.width - 46, 30);
  ctx.textAlign = "left";

  // Speech bubble near the robot.
  if (vm.bubble && robot) {
    const [rx, ry] = mapping.toCanvas(robot.x, robot.y);
    const text = vm.bubble.text;
    ctx.font = "12px sans-serif";
    const w = Math.min(300, ctx.measureText(text).width + 16);
    const bx = Math.min(rx - w / 2, canvas.width - w - 8);
    ctx.fillStyle = "#e8ecf3";
    ctx.strokeStyle = "#3a4354";
    ctx.beginPath();
    ctx.roundRect(Math.max(8, bx), ry - 56, w, 26, 6);
    ctx.fill();
    ctx.stroke();
    ctx.fillStyle = "#14181f";
    ctx.fillText(text, Math.max(16, bx + 8), ry - 38, w - 16);
  }
}
