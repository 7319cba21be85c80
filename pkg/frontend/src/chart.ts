/** Objective-vs-iteration chart on a plain canvas. */

export interface ChartPoint {
  x: number;
  y: number;
}

export function chartPoints(
  history: [number, number][],
  width: number,
  height: number,
  pad = 28,
): ChartPoint[] {
  if (history.length === 0) return [];
  const xs = history.map(([it]) => it);
  const ys = history.map(([, c]) => c);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  return history.map(([it, c]) => ({
    x: pad + ((it - xMin) / xSpan) * (width - 2 * pad),
    y: height - pad - ((c - yMin) / ySpan) * (height - 2 * pad),
  }));
}

export function drawChart(canvas: HTMLCanvasElement, history: [number, number][]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#666";
  ctx.lineWidth = 1;
  ctx.strokeRect(28, 10, width - 56, height - 38);
  const pts = chartPoints(history, width, height);
  if (pts.length === 0) return;
  ctx.strokeStyle = "#2f6fdb";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  pts.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
  ctx.stroke();
  ctx.fillStyle = "#2f6fdb";
  for (const p of pts) {
    ctx.fillRect(p.x - 1.5, p.y - 1.5, 3, 3);
  }
  const last = history[history.length - 1];
  ctx.fillStyle = "#222";
  ctx.font = "11px sans-serif";
  ctx.fillText(`it ${last[0]}  c ${last[1].toPrecision(5)}`, 32, height - 6);
}
