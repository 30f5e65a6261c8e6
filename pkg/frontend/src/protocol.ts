// Wire protocol (version 1): newline-framed JSON over TCP, or one JSON
// object per WebSocket text frame. Mirrors PROTOCOL.md at the repo root.

export const PROTOCOL_VERSION = 1;

export const GESTURES = [
  "right_elbow_flex",
  "left_elbow_flex",
  "right_shoulder_protract",
  "left_shoulder_protract",
] as const;
export type Gesture = (typeof GESTURES)[number];
export type Intensities = Partial<Record<Gesture, number>>;

export interface WorldSnapshot {
  id: string;
  walls: number[][];
  path: number[][];
  start: { x: number; y: number; theta: number };
  goal: { x: number; y: number; radius: number };
}

export interface Vehicle {
  v_f: number;
  v_r: number;
  body_radius: number;
}

export interface Metrics {
  dist: number;
  e_diff: number;
}

export interface TrialSummary {
  trial_id: string;
  stop_reason: string;
  metrics: Metrics;
}

export type ServerMessage =
  | { type: "hello"; version: number; role: string; mode: string; dt: number }
  | { type: "world_snapshot"; world: WorldSnapshot; vehicle: Vehicle }
  | { type: "trial_history"; trials: TrialSummary[] }
  | { type: "trial_start"; trial_id: string; t0: number }
  | {
      type: "tick_telemetry";
      trial_id: string;
      t: number;
      x: number;
      y: number;
      theta: number;
      u1: number;
      u2: number;
    }
  | { type: "trial_end"; trial_id: string; stop_reason: string; metrics: Metrics }
  | { type: "error"; code: string; detail: string };

export function parseMessage(raw: string): ServerMessage {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch (e) {
    throw new Error(`malformed server message: ${e}`);
  }
  if (typeof msg !== "object" || msg === null || typeof (msg as any).type !== "string") {
    throw new Error("malformed server message: no type field");
  }
  return msg as ServerMessage;
}

export function helloFrame(role: "driver" | "observer"): string {
  return JSON.stringify({ type: "hello", version: PROTOCOL_VERSION, role });
}

export function gestureFrame(intensities: Intensities): string {
  return JSON.stringify({ type: "gesture", intensities });
}

export function trialStartFrame(): string {
  return JSON.stringify({ type: "trial_start" });
}

// Raw decimal tokens for the metric fields, straight from the wire, so the
// dashboard can display exactly the bytes the server sent.
export function metricTokens(raw: string): { dist?: string; e_diff?: string } {
  const out: { dist?: string; e_diff?: string } = {};
  const dist = raw.match(/"dist":\s*(-?[0-9.eE+-]+)/);
  if (dist) out.dist = dist[1];
  const ediff = raw.match(/"e_diff":\s*(-?[0-9.eE+-]+)/);
  if (ediff) out.e_diff = ediff[1];
  return out;
}
