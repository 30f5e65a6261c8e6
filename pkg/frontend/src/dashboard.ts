// Per-trial Dist / E_diff trends: a small two-series chart plus the raw
// values exactly as the server sent them.

import { ViewState } from "./state.js";

export function drawTrends(canvas: HTMLCanvasElement, state: ViewState) {
  const ctx = canvas.getContext("2d")!;
  const w = canvas.width, h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, w, h);
  const rows = state.history;
  if (rows.length === 0) return;
  const pad = 24;
  const series: Array<{ key: "dist" | "eDiff"; color: string }> = [
    { key: "dist", color: "#5aa9e6" },
    { key: "eDiff", color: "#e05252" },
  ];
  for (const { key, color } of series) {
    const values = rows.map((r) => r[key]);
    const vmax = Math.max(...values, 1e-9);
    ctx.strokeStyle = color;
    ctx.fillStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    values.forEach((v, i) => {
      const x = rows.length === 1 ? w / 2
        : pad + (i * (w - 2 * pad)) / (rows.length - 1);
      const y = h - pad - (v / vmax) * (h - 2 * pad);
      if (i === 0) ctx.moveTo(x, y); else ctx.lineTo(x, y);
      ctx.fillRect(x - 3, y - 3, 6, 6);
    });
    if (rows.length > 1) ctx.stroke();
  }
}

export function trendTable(state: ViewState): string {
  if (state.history.length === 0) {
    return "<tr><td colspan=4>no trials yet</td></tr>";
  }
  return state.history
    .map(
      (r) =>
        `<tr><td>${r.trialId}</td><td>${r.stopReason}</td>` +
        `<td>${r.distText}</td><td>${r.eDiffText}</td></tr>`,
    )
    .join("");
}
