// ViewState: everything the UI renders, derived solely from protocol
// messages. The client simulates nothing; reducing the same message stream
// always rebuilds the same view.

import {
  Metrics,
  ServerMessage,
  TrialSummary,
  Vehicle,
  WorldSnapshot,
  metricTokens,
  parseMessage,
} from "./protocol.js";

export interface TrialRow {
  trialId: string;
  stopReason: string;
  dist: number;
  eDiff: number;
  // wire-exact decimal strings for display
  distText: string;
  eDiffText: string;
}

export interface ViewState {
  connection: "connecting" | "open" | "stale";
  role: string | null;
  dt: number | null;
  world: WorldSnapshot | null;
  vehicle: Vehicle | null;
  pose: { t: number; x: number; y: number; theta: number } | null;
  u1: number;
  u2: number;
  trialId: string | null;
  trialActive: boolean;
  trace: Array<[number, number]>;
  history: TrialRow[];
  lastError: { code: string; detail: string } | null;
}

export function initialState(): ViewState {
  return {
    connection: "connecting",
    role: null,
    dt: null,
    world: null,
    vehicle: null,
    pose: null,
    u1: 0,
    u2: 0,
    trialId: null,
    trialActive: false,
    trace: [],
    history: [],
    lastError: null,
  };
}

function summaryRow(t: TrialSummary, tokens: { dist?: string; e_diff?: string }): TrialRow {
  return {
    trialId: t.trial_id,
    stopReason: t.stop_reason,
    dist: t.metrics.dist,
    eDiff: t.metrics.e_diff,
    distText: tokens.dist ?? String(t.metrics.dist),
    eDiffText: tokens.e_diff ?? String(t.metrics.e_diff),
  };
}

/** Apply one raw server message (JSON text) to the view state. */
export function reduce(state: ViewState, raw: string): ViewState {
  let msg: ServerMessage;
  try {
    msg = parseMessage(raw);
  } catch (e) {
    state.lastError = { code: "client-parse", detail: String(e) };
    return state;
  }
  switch (msg.type) {
    case "hello":
      state.role = msg.role;
      state.dt = msg.dt;
      break;
    case "world_snapshot":
      state.world = msg.world;
      state.vehicle = msg.vehicle;
      break;
    case "trial_history": {
      // one raw line may carry several summaries; recover each trial's
      // metric bytes from the canonical serialization (keys sorted, so
      // metrics precede trial_id within each object)
      const pattern =
        /\{"metrics":\{"dist":(-?[0-9.eE+-]+),"e_diff":(-?[0-9.eE+-]+)\},"stop_reason":"([^"]*)","trial_id":"([^"]*)"\}/g;
      const tokens = new Map<string, { dist: string; e_diff: string }>();
      for (const m of raw.matchAll(pattern)) {
        tokens.set(m[4], { dist: m[1], e_diff: m[2] });
      }
      state.history = msg.trials.map((t) =>
        summaryRow(t, tokens.get(t.trial_id) ?? {}),
      );
      break;
    }
    case "trial_start":
      state.trialId = msg.trial_id;
      state.trialActive = true;
      state.trace = state.world
        ? [[state.world.start.x, state.world.start.y]]
        : [];
      state.u1 = 0;
      state.u2 = 0;
      break;
    case "tick_telemetry":
      state.pose = { t: msg.t, x: msg.x, y: msg.y, theta: msg.theta };
      state.u1 = msg.u1;
      state.u2 = msg.u2;
      if (msg.trial_id === state.trialId) {
        state.trace.push([msg.x, msg.y]);
      }
      break;
    case "trial_end": {
      state.trialActive = false;
      const tokens = metricTokens(raw);
      state.history = [
        ...state.history,
        summaryRow(
          { trial_id: msg.trial_id, stop_reason: msg.stop_reason, metrics: msg.metrics },
          tokens,
        ),
      ];
      break;
    }
    case "error":
      state.lastError = { code: msg.code, detail: msg.detail };
      break;
  }
  return state;
}

export function reduceAll(state: ViewState, raws: Iterable<string>): ViewState {
  for (const raw of raws) reduce(state, raw);
  return state;
}
