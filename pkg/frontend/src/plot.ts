import { dataToPx, type Transform } from "./knots.js";

export interface Trace {
  x: number[];
  y: number[];
  color: string;
  width?: number;
  dash?: number[];
}

export interface Marker {
  x: number;
  y: number;
  color: string;
  radius?: number;
  active?: boolean;
}

const PAD = 40;

export function fitTransform(
  traces: Trace[],
  width: number,
  height: number,
): Transform {
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const tr of traces) {
    for (const v of tr.x) {
      if (v < xMin) xMin = v;
      if (v > xMax) xMax = v;
    }
    for (const v of tr.y) {
      if (v < yMin) yMin = v;
      if (v > yMax) yMax = v;
    }
  }
  if (!isFinite(xMin)) {
    xMin = 0;
    xMax = 1;
    yMin = 0;
    yMax = 1;
  }
  if (xMax === xMin) xMax = xMin + 1;
  if (yMax === yMin) yMax = yMin + 1;
  const ySlack = 0.05 * (yMax - yMin);
  return {
    xMin,
    xMax,
    yMin: yMin - ySlack,
    yMax: yMax + ySlack,
    width,
    height,
  };
}

export class Plot {
  private readonly ctx: CanvasRenderingContext2D;
  transform: Transform;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
    this.transform = fitTransform([], canvas.width, canvas.height);
  }

  render(
    traces: Trace[],
    markers: Marker[] = [],
    vlines: { x: number; color: string }[] = [],
  ): void {
    const { ctx, canvas } = this;
    const t = fitTransform(traces, canvas.width - 2 * PAD, canvas.height - 2 * PAD);
    this.transform = t;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.save();
    ctx.translate(PAD, PAD);

    ctx.strokeStyle = "#888";
    ctx.lineWidth = 1;
    ctx.strokeRect(0, 0, t.width, t.height);
    this.axisLabels(t);

    for (const line of vlines) {
      const { px } = dataToPx(t, line.x, t.yMin);
      ctx.strokeStyle = line.color;
      ctx.setLineDash([4, 4]);
      ctx.beginPath();
      ctx.moveTo(px, 0);
      ctx.lineTo(px, t.height);
      ctx.stroke();
      ctx.setLineDash([]);
    }

    for (const tr of traces) {
      ctx.strokeStyle = tr.color;
      ctx.lineWidth = tr.width ?? 1.5;
      ctx.setLineDash(tr.dash ?? []);
      ctx.beginPath();
      const n = Math.min(tr.x.length, tr.y.length);
      for (let i = 0; i < n; i++) {
        const { px, py } = dataToPx(t, tr.x[i] as number, tr.y[i] as number);
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      }
      ctx.stroke();
      ctx.setLineDash([]);
    }

    for (const m of markers) {
      const { px, py } = dataToPx(t, m.x, m.y);
      ctx.fillStyle = m.color;
      ctx.beginPath();
      ctx.arc(px, py, m.radius ?? 5, 0, 2 * Math.PI);
      ctx.fill();
      if (m.active) {
        ctx.strokeStyle = "#000";
        ctx.lineWidth = 2;
        ctx.stroke();
      }
    }
    ctx.restore();
  }

  /** Mouse position in inner-plot pixels. */
  toInner(clientX: number, clientY: number): { px: number; py: number } {
    const rect = this.canvas.getBoundingClientRect();
    return { px: clientX - rect.left - PAD, py: clientY - rect.top - PAD };
  }

  private axisLabels(t: Transform): void {
    const { ctx } = this;
    ctx.fillStyle = "#444";
    ctx.font = "11px sans-serif";
    ctx.textAlign = "center";
    for (let i = 0; i <= 4; i++) {
      const x = t.xMin + (i / 4) * (t.xMax - t.xMin);
      const { px } = dataToPx(t, x, t.yMin);
      ctx.fillText(x.toPrecision(5), px, t.height + 14);
    }
    ctx.textAlign = "right";
    for (let i = 0; i <= 4; i++) {
      const y = t.yMin + (i / 4) * (t.yMax - t.yMin);
      const { py } = dataToPx(t, t.xMin, y);
      ctx.fillText(y.toPrecision(3), -4, py + 4);
    }
  }
}
