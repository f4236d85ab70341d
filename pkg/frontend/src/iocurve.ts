// IO-curve panel: normal and impaired input-output curves for the selected
// frequency, the 1:1 reference, and zero-cross markers.

import type { IoCurveResponse } from "./api.js";

export interface IoPlotModel {
  pIn: number[];
  curves: { label: string; color: string; dashed: boolean; values: number[] }[];
  markers: { label: string; pIn: number }[];
}

function zeroCross(pIn: number[], pOut: number[]): number | null {
  for (let i = 1; i < pOut.length; i++) {
    if (pOut[i - 1] <= 0 && pOut[i] > 0) {
      const t = -pOut[i - 1] / (pOut[i] - pOut[i - 1]);
      return pIn[i - 1] + t * (pIn[i] - pIn[i - 1]);
    }
  }
  return null;
}

/** Every plotted value comes straight from the service response. */
export function ioPlotModel(resp: IoCurveResponse): IoPlotModel {
  const curves: IoPlotModel["curves"] = [
    { label: "1:1", color: "#999999", dashed: true, values: [...resp.p_in_db] },
    { label: "normal", color: "#2060c0", dashed: false, values: [...resp.nh_db] },
  ];
  const markers: IoPlotModel["markers"] = [];
  const nhZero = zeroCross(resp.p_in_db, resp.nh_db);
  if (nhZero !== null) {
    markers.push({ label: "HL 0 dB", pIn: nhZero });
  }
  if (resp.hi_db) {
    curves.push({ label: "impaired", color: "#c04020", dashed: false,
                  values: [...resp.hi_db] });
    const hiZero = zeroCross(resp.p_in_db, resp.hi_db);
    if (hiZero !== null && resp.hl_total_db !== undefined) {
      markers.push({ label: `HL ${resp.hl_total_db.toFixed(1)} dB`, pIn: hiZero });
    }
  }
  return { pIn: [...resp.p_in_db], curves, markers };
}

const PAD = { left: 44, right: 10, top: 14, bottom: 28 };
const OUT_MIN = -30;
const OUT_MAX = 90;

export function renderIoPlot(canvas: HTMLCanvasElement, model: IoPlotModel): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  const xOf = (p: number) =>
    PAD.left + ((p - model.pIn[0]) / (model.pIn[model.pIn.length - 1] - model.pIn[0]))
      * (width - PAD.left - PAD.right);
  const yOf = (v: number) =>
    height - PAD.bottom - ((v - OUT_MIN) / (OUT_MAX - OUT_MIN))
      * (height - PAD.top - PAD.bottom);

  ctx.clearRect(0, 0, width, height);
  ctx.font = "11px sans-serif";
  ctx.strokeStyle = "#dddddd";
  ctx.fillStyle = "#666666";
  for (let v = OUT_MIN; v <= OUT_MAX; v += 30) {
    ctx.beginPath();
    ctx.moveTo(PAD.left, yOf(v));
    ctx.lineTo(width - PAD.right, yOf(v));
    ctx.stroke();
    ctx.fillText(String(v), 8, yOf(v) + 4);
  }
  for (let p = -20; p <= 120; p += 20) {
    ctx.fillText(String(p), xOf(p) - 8, height - 8);
  }

  for (const curve of model.curves) {
    ctx.strokeStyle = curve.color;
    ctx.setLineDash(curve.dashed ? [5, 4] : []);
    ctx.beginPath();
    let started = false;
    curve.values.forEach((v, i) => {
      if (v < OUT_MIN || v > OUT_MAX) return;
      const x = xOf(model.pIn[i]);
      const y = yOf(v);
      if (!started) {
        ctx.moveTo(x, y);
        started = true;
      } else {
        ctx.lineTo(x, y);
      }
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);

  ctx.fillStyle = "#333333";
  for (const marker of model.markers) {
    const x = xOf(marker.pIn);
    const y = yOf(0);
    ctx.beginPath();
    ctx.moveTo(x, y - 7);
    ctx.lineTo(x - 5, y + 3);
    ctx.lineTo(x + 5, y + 3);
    ctx.closePath();
    ctx.fill();
    ctx.fillText(marker.label, x - 18, y + 16);
  }
}
