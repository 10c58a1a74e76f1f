// Hand-rolled canvas strip chart for the three force channels. Axes are
// labeled in newtons and seconds; redraw happens on the display refresh with
// whatever is in the telemetry buffer.

import type { TelemetryMessage } from "./types";

interface Series {
  key: "f_current" | "f_sensor" | "f_fused";
  label: string;
  color: string;
}

const SERIES: Series[] = [
  { key: "f_current", label: "f_current", color: "#4f8ef7" },
  { key: "f_sensor", label: "f_sensor (filtered)", color: "#58b368" },
  { key: "f_fused", label: "f_fused", color: "#e2574c" },
];

const MARGIN = { left: 46, right: 10, top: 8, bottom: 22 };

export class ForceTraceChart {
  private ctx: CanvasRenderingContext2D;

  // Client-side decimation: cap the points drawn per refresh regardless of
  // buffer depth; the newest sample is always included.
  constructor(private canvas: HTMLCanvasElement, private maxPoints = 900) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
  }

  private decimate(trace: readonly TelemetryMessage[]): readonly TelemetryMessage[] {
    if (trace.length <= this.maxPoints) return trace;
    const stride = Math.ceil(trace.length / this.maxPoints);
    const out: TelemetryMessage[] = [];
    for (let i = 0; i < trace.length; i += stride) out.push(trace[i]);
    if (out[out.length - 1] !== trace[trace.length - 1]) {
      out.push(trace[trace.length - 1]);
    }
    return out;
  }

  render(fullTrace: readonly TelemetryMessage[]): void {
    const trace = this.decimate(fullTrace);
    const { width, height } = this.canvas;
    const ctx = this.ctx;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#14171c";
    ctx.fillRect(0, 0, width, height);
    if (trace.length < 2) return;

    const t0 = trace[0].t;
    const t1 = trace[trace.length - 1].t;
    let fMin = 0;
    let fMax = 1;
    for (const m of trace) {
      for (const s of SERIES) {
        const v = m[s.key];
        if (v < fMin) fMin = v;
        if (v > fMax) fMax = v;
      }
    }
    const span = fMax - fMin || 1;
    fMax += span * 0.08;
    fMin -= span * 0.08;

    const plotW = width - MARGIN.left - MARGIN.right;
    const plotH = height - MARGIN.top - MARGIN.bottom;
    const x = (t: number) => MARGIN.left + ((t - t0) / (t1 - t0 || 1)) * plotW;
    const y = (f: number) => MARGIN.top + (1 - (f - fMin) / (fMax - fMin)) * plotH;

    // Grid and axis labels (N on the left, s along the bottom).
    ctx.strokeStyle = "#2a2f38";
    ctx.fillStyle = "#9aa3b2";
    ctx.font = "10px sans-serif";
    ctx.lineWidth = 1;
    const fTicks = 4;
    for (let i = 0; i <= fTicks; i++) {
      const f = fMin + ((fMax - fMin) * i) / fTicks;
      const py = y(f);
      ctx.beginPath();
      ctx.moveTo(MARGIN.left, py);
      ctx.lineTo(width - MARGIN.right, py);
      ctx.stroke();
      ctx.fillText(`${f.toFixed(1)} N`, 4, py + 3);
    }
    const tTicks = 5;
    for (let i = 0; i <= tTicks; i++) {
      const t = t0 + ((t1 - t0) * i) / tTicks;
      const px = x(t);
      ctx.fillText(`${t.toFixed(1)} s`, px - 12, height - 6);
    }

    for (const s of SERIES) {
      ctx.strokeStyle = s.color;
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      trace.forEach((m, i) => {
        const px = x(m.t);
        const py = y(m[s.key]);
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      });
      ctx.stroke();
    }

    // Legend.
    let lx = MARGIN.left + 6;
    for (const s of SERIES) {
      ctx.fillStyle = s.color;
      ctx.fillRect(lx, MARGIN.top + 2, 10, 3);
      ctx.fillStyle = "#c7cdd8";
      ctx.fillText(s.label, lx + 14, MARGIN.top + 7);
      lx += 14 + ctx.measureText(s.label).width + 16;
    }
  }
}
