// Top-down canvas rendering of the world, the driven trace, and the two
// control gauges. Pure drawing: every number on screen came from a message.

import { ViewState } from "./state.js";

interface Fit {
  scale: number;
  ox: number;
  oy: number;
}

function fitWorld(state: ViewState, w: number, h: number): Fit {
  const world = state.world!;
  let minx = Infinity, miny = Infinity, maxx = -Infinity, maxy = -Infinity;
  const extend = (x: number, y: number) => {
    minx = Math.min(minx, x); maxx = Math.max(maxx, x);
    miny = Math.min(miny, y); maxy = Math.max(maxy, y);
  };
  for (const [x1, y1, x2, y2] of world.walls as [number, number, number, number][]) {
    extend(x1, y1); extend(x2, y2);
  }
  for (const [x, y] of world.path as [number, number][]) extend(x, y);
  extend(world.goal.x - world.goal.radius, world.goal.y - world.goal.radius);
  extend(world.goal.x + world.goal.radius, world.goal.y + world.goal.radius);
  const pad = 1.0;
  const scale = Math.min(w / (maxx - minx + 2 * pad), h / (maxy - miny + 2 * pad));
  return { scale, ox: minx - pad, oy: miny - pad };
}

export function draw(canvas: HTMLCanvasElement, state: ViewState) {
  const ctx = canvas.getContext("2d")!;
  const w = canvas.width, h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, w, h);
  if (!state.world) return;
  const fit = fitWorld(state, w, h);
  const X = (x: number) => (x - fit.ox) * fit.scale;
  const Y = (y: number) => h - (y - fit.oy) * fit.scale; // y-up world

  const world = state.world;
  // prescribed track
  ctx.strokeStyle = "#e8e6df";
  ctx.lineWidth = Math.max(2, 0.12 * fit.scale);
  ctx.setLineDash([10, 8]);
  ctx.beginPath();
  world.path.forEach(([x, y], i) => (i ? ctx.lineTo(X(x), Y(y)) : ctx.moveTo(X(x), Y(y))));
  ctx.stroke();
  ctx.setLineDash([]);
  // goal disc
  ctx.strokeStyle = "#46c46a";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(X(world.goal.x), Y(world.goal.y), world.goal.radius * fit.scale, 0, 2 * Math.PI);
  ctx.stroke();
  // walls
  ctx.strokeStyle = "#7b8494";
  ctx.lineWidth = 3;
  for (const [x1, y1, x2, y2] of world.walls as [number, number, number, number][]) {
    ctx.beginPath();
    ctx.moveTo(X(x1), Y(y1));
    ctx.lineTo(X(x2), Y(y2));
    ctx.stroke();
  }
  // driven trace
  if (state.trace.length > 1) {
    ctx.strokeStyle = "#e05252";
    ctx.lineWidth = 2;
    ctx.beginPath();
    state.trace.forEach(([x, y], i) => (i ? ctx.lineTo(X(x), Y(y)) : ctx.moveTo(X(x), Y(y))));
    ctx.stroke();
  }
  // wheelchair
  const pose = state.pose ?? { x: world.start.x, y: world.start.y, theta: world.start.theta, t: 0 };
  const r = (state.vehicle?.body_radius ?? 0.35) * fit.scale;
  ctx.save();
  ctx.translate(X(pose.x), Y(pose.y));
  ctx.rotate(-pose.theta); // canvas y flip reverses rotation sense
  ctx.fillStyle = "#5aa9e6";
  ctx.beginPath();
  ctx.moveTo(1.4 * r, 0);
  ctx.lineTo(-0.8 * r, 0.9 * r);
  ctx.lineTo(-0.8 * r, -0.9 * r);
  ctx.closePath();
  ctx.fill();
  ctx.restore();
}

export function drawGauge(el: HTMLElement, label: string, value: number) {
  const pct = Math.round(Math.abs(value) * 100);
  const side = value >= 0 ? "pos" : "neg";
  el.innerHTML =
    `<span class="gauge-label">${label}</span>` +
    `<span class="gauge-bar ${side}" style="width:${pct / 2}%"></span>` +
    `<span class="gauge-value">${value.toFixed(3)}</span>`;
}
