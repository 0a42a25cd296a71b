// JSON message frames shared with the session socket. One envelope shape,
// payload keyed by type; unknown payload fields are preserved for forward
// compatibility.

export type Phase = "down" | "move" | "up";

export interface FramePayload {
  t: number;
  w: number;
  h: number;
  data: string; // base64 raw RGB, w*h*3 bytes
}

export interface PromptPayload {
  text: string;
}

export interface PointerPayload {
  phase: Phase;
  x: number;
  y: number;
  t_ms: number;
}

export interface ControlPayload {
  cmd: string;
  token?: string;
  error?: string;
  [extra: string]: unknown;
}

export interface PlannedGesture {
  kind: "tap" | "swipe";
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  dur: number;
}

export interface PlannedAction {
  tactic_id: string;
  rule: string;
  gestures: PlannedGesture[];
}

export interface StatusPayload {
  score?: number;
  level?: number;
  actions?: number;
  planned?: PlannedAction;
  done?: boolean;
  error?: string;
  report?: Record<string, unknown>;
  session_dir?: string;
  t?: number;
}

export type WireMessage =
  | { type: "frame"; payload: FramePayload }
  | { type: "prompt"; payload: PromptPayload }
  | { type: "pointer"; payload: PointerPayload }
  | { type: "control"; payload: ControlPayload }
  | { type: "status"; payload: StatusPayload };

const TYPES = new Set(["frame", "prompt", "pointer", "control", "status"]);

export class WireError extends Error {}

export function parseMessage(raw: string): WireMessage {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    throw new WireError("not JSON");
  }
  if (typeof doc !== "object" || doc === null) throw new WireError("not an object");
  const { type, payload } = doc as { type?: unknown; payload?: unknown };
  if (typeof type !== "string" || !TYPES.has(type)) {
    throw new WireError(`unknown message type: ${String(type)}`);
  }
  if (typeof payload !== "object" || payload === null) {
    throw new WireError(`message ${type} has no payload`);
  }
  return { type, payload } as WireMessage;
}

export function pointerMessage(phase: Phase, x: number, y: number, t_ms: number): WireMessage {
  return { type: "pointer", payload: { phase, x, y, t_ms } };
}

export function controlMessage(cmd: string, extra: Record<string, unknown> = {}): WireMessage {
  return { type: "control", payload: { cmd, ...extra } };
}

export function encodeMessage(msg: WireMessage): string {
  return JSON.stringify(msg);
}
