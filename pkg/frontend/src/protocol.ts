/** Wire protocol shared with the session service: {"v":1,"type":...,"body":{...}}. */

export const PROTOCOL_VERSION = 1;

export interface Envelope {
  v: number;
  type: string;
  body: Record<string, unknown>;
  session_id?: string;
  ts?: number;
}

export interface WorldObjectView {
  id: string;
  category: string;
  color: string | null;
  x: number;
  y: number;
  z: number;
  radius: number;
  movable: boolean;
}

export interface ZoneView {
  id: string;
  kind: string;
  x: number;
  y: number;
  radius: number;
}

export interface WorldSnapshotBody {
  clock: number;
  corridor: { width: number; length: number };
  user: { x: number; y: number; heading: number; held_object: string | null };
  objects: WorldObjectView[];
  zones: ZoneView[];
  gaze_target: string | null;
  step: { id: string; instruction: string };
  condition: string;
  state: string;
  completed: boolean;
}

export type ClientMessageType =
  | "start"
  | "set_condition"
  | "utterance"
  | "gaze"
  | "move"
  | "pick"
  | "place"
  | "operator_say"
  | "stop";

export function makeMessage(
  type: ClientMessageType,
  body: Record<string, unknown> = {},
): Envelope {
  return { v: PROTOCOL_VERSION, type, body };
}
