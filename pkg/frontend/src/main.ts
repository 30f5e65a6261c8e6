// Wiring: URL params -> connection -> view. ?server=ws://host:port and
// ?observer=1 are the only configuration.

import { Connection } from "./connection.js";
import { drawTrends, trendTable } from "./dashboard.js";
import { GestureInput } from "./input.js";
import { trialStartFrame } from "./protocol.js";
import { draw, drawGauge } from "./render.js";
import { initialState } from "./state.js";

const params = new URLSearchParams(location.search);
const server = params.get("server") ?? "ws://127.0.0.1:8766";
const role = params.get("observer") ? "observer" : "driver";

const worldCanvas = document.getElementById("world") as HTMLCanvasElement;
const trendCanvas = document.getElementById("trends") as HTMLCanvasElement;
const banner = document.getElementById("banner")!;
const gaugeU1 = document.getElementById("gauge-u1")!;
const gaugeU2 = document.getElementById("gauge-u2")!;
const tableBody = document.getElementById("trend-rows")!;
const startButton = document.getElementById("start-trial") as HTMLButtonElement;
const status = document.getElementById("status")!;

const state = initialState();
let dirty = true;

const conn = new Connection(state, {
  url: server,
  role,
  onChange: () => {
    dirty = true;
  },
});
conn.start();

const input = new GestureInput();
if (role === "driver") {
  input.attach(window, (frame) => conn.send(frame), 50);
  startButton.onclick = () => conn.send(trialStartFrame());
} else {
  startButton.disabled = true;
}

function render() {
  if (dirty) {
    dirty = false;
    banner.className = state.connection === "open" ? "banner ok" : "banner stale";
    banner.textContent =
      state.connection === "open"
        ? `connected as ${state.role ?? "..."} to ${server}`
        : state.connection === "stale"
          ? "connection lost; showing last known state"
          : "connecting...";
    if (state.lastError) {
      status.textContent = `server: ${state.lastError.code}: ${state.lastError.detail}`;
    } else if (state.trialActive) {
      status.textContent = `trial ${state.trialId} running; t=${state.pose?.t.toFixed(2) ?? "0"} s`;
    } else {
      status.textContent = "idle; press Start trial, then pump the arrow keys";
    }
    draw(worldCanvas, state);
    drawTrends(trendCanvas, state);
    drawGauge(gaugeU1, "u1 speed", state.u1);
    drawGauge(gaugeU2, "u2 turn", state.u2);
    tableBody.innerHTML = trendTable(state);
  }
  requestAnimationFrame(render);
}
requestAnimationFrame(render);
