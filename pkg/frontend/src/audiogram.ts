// Audiogram editor: draggable points on the 7 audiometric frequencies plus
// the loss-split overlay. Plot data is computed as a pure model so tests can
// verify that every displayed number originates from an API response.

import type { HlSplitResponse } from "./api.js";
import { AUDIOMETRIC_FREQS, HL_MAX, HL_MIN } from "./state.js";

export interface PlotLine {
  label: "hl-total" | "hl-act" | "zero";
  color: string;
  valuesDb: number[];   // one per audiometric frequency
}

export interface AudiogramPlotModel {
  freqsHz: number[];
  lines: PlotLine[];
  passiveRegion: { upperDb: number[]; lowerDb: number[] } | null;
  stale: boolean;
}

/** Editable audiogram points always draw; split lines come from the API. */
export function plotModel(hlDb: number[], split: HlSplitResponse | null,
                          stale = false): AudiogramPlotModel {
  const freqs = [...AUDIOMETRIC_FREQS];
  const lines: PlotLine[] = [
    { label: "zero", color: "#2a9d2a", valuesDb: freqs.map(() => 0) },
    { label: "hl-total", color: "#222222", valuesDb: [...hlDb] },
  ];
  let passive: AudiogramPlotModel["passiveRegion"] = null;
  if (split) {
    const act = split.points.map((p) => p.hl_act_db);
    lines.push({ label: "hl-act", color: "#cc33cc", valuesDb: act });
    passive = {
      upperDb: split.points.map((p) => p.hl_total_db),
      lowerDb: act,
    };
  }
  return { freqsHz: freqs, lines, passiveRegion: passive, stale };
}

// -- canvas geometry ---------------------------------------------------------

const PAD = { left: 46, right: 12, top: 18, bottom: 30 };

export function freqToX(freq: number, width: number): number {
  const lo = Math.log10(AUDIOMETRIC_FREQS[0]);
  const hi = Math.log10(AUDIOMETRIC_FREQS[AUDIOMETRIC_FREQS.length - 1]);
  const t = (Math.log10(freq) - lo) / (hi - lo);
  return PAD.left + t * (width - PAD.left - PAD.right);
}

export function dbToY(db: number, height: number): number {
  const t = (db - HL_MIN) / (HL_MAX - HL_MIN);
  return PAD.top + t * (height - PAD.top - PAD.bottom);
}

export function yToDb(y: number, height: number): number {
  const t = (y - PAD.top) / (height - PAD.top - PAD.bottom);
  return HL_MIN + t * (HL_MAX - HL_MIN);
}

export function nearestPointIndex(x: number, width: number): number {
  let best = 0;
  let bestDist = Infinity;
  AUDIOMETRIC_FREQS.forEach((f, i) => {
    const d = Math.abs(freqToX(f, width) - x);
    if (d < bestDist) {
      best = i;
      bestDist = d;
    }
  });
  return best;
}

export class AudiogramEditor {
  private dragging: number | null = null;
  private model: AudiogramPlotModel;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly onEdit: (index: number, db: number) => void,
  ) {
    this.model = plotModel(AUDIOMETRIC_FREQS.map(() => 0), null);
    canvas.addEventListener("pointerdown", (ev) => {
      this.dragging = nearestPointIndex(this.localX(ev), canvas.width);
      this.applyDrag(ev);
    });
    canvas.addEventListener("pointermove", (ev) => this.applyDrag(ev));
    const stop = () => {
      this.dragging = null;
    };
    canvas.addEventListener("pointerup", stop);
    canvas.addEventListener("pointerleave", stop);
  }

  private localX(ev: PointerEvent): number {
    const rect = this.canvas.getBoundingClientRect();
    return ((ev.clientX - rect.left) / rect.width) * this.canvas.width;
  }

  private localY(ev: PointerEvent): number {
    const rect = this.canvas.getBoundingClientRect();
    return ((ev.clientY - rect.top) / rect.height) * this.canvas.height;
  }

  private applyDrag(ev: PointerEvent): void {
    if (this.dragging === null) return;
    this.onEdit(this.dragging, yToDb(this.localY(ev), this.canvas.height));
  }

  render(model: AudiogramPlotModel): void {
    this.model = model;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.font = "11px sans-serif";

    // grid
    ctx.strokeStyle = "#dddddd";
    ctx.fillStyle = "#666666";
    for (let db = 0; db <= HL_MAX; db += 20) {
      const y = dbToY(db, height);
      ctx.beginPath();
      ctx.moveTo(PAD.left, y);
      ctx.lineTo(width - PAD.right, y);
      ctx.stroke();
      ctx.fillText(String(db), 8, y + 4);
    }
    for (const f of model.freqsHz) {
      const x = freqToX(f, width);
      ctx.beginPath();
      ctx.moveTo(x, PAD.top);
      ctx.lineTo(x, height - PAD.bottom);
      ctx.stroke();
      ctx.fillText(f >= 1000 ? `${f / 1000}k` : String(f), x - 10, height - 10);
    }

    if (model.passiveRegion) {
      ctx.fillStyle = "rgba(120, 120, 240, 0.15)";
      ctx.beginPath();
      model.freqsHz.forEach((f, i) => {
        const x = freqToX(f, width);
        const y = dbToY(model.passiveRegion!.upperDb[i], height);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      for (let i = model.freqsHz.length - 1; i >= 0; i--) {
        ctx.lineTo(freqToX(model.freqsHz[i], width),
                   dbToY(model.passiveRegion.lowerDb[i], height));
      }
      ctx.closePath();
      ctx.fill();
    }

    for (const line of model.lines) {
      ctx.strokeStyle = line.color;
      ctx.lineWidth = line.label === "hl-total" ? 2 : 1.5;
      ctx.beginPath();
      model.freqsHz.forEach((f, i) => {
        const x = freqToX(f, width);
        const y = dbToY(line.valuesDb[i], height);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.stroke();
      if (line.label === "hl-total") {
        ctx.fillStyle = line.color;
        model.freqsHz.forEach((f, i) => {
          ctx.beginPath();
          ctx.arc(freqToX(f, width), dbToY(line.valuesDb[i], height), 5, 0, 2 * Math.PI);
          ctx.fill();
        });
      }
    }
    ctx.lineWidth = 1;

    if (model.stale) {
      ctx.fillStyle = "rgba(200, 60, 60, 0.85)";
      ctx.fillText("split outdated (service unreachable)", PAD.left + 6, PAD.top + 2);
    }
  }

  current(): AudiogramPlotModel {
    return this.model;
  }
}
