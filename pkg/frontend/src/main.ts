// Wiring: session state, the editor canvases, the listen loop, and the
// service client. Playback SPL is uncalibrated; a disclaimer is shown.

import { ApiClient } from "./api.js";
import { fileToUploadWav, Recorder } from "./audio.js";
import { AudiogramEditor, plotModel } from "./audiogram.js";
import { ioPlotModel, renderIoPlot } from "./iocurve.js";
import {
  defaultSession, jobRequest, loadSession, saveSession, setAlphaPercent,
  setPoint, UiSession,
} from "./state.js";

const api = new ApiClient();
let session: UiSession = loadSession(localStorage);
let pendingClip: Blob | null = null;
const recorder = new Recorder();

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const banner = $<HTMLDivElement>("banner");
const audiogramCanvas = $<HTMLCanvasElement>("audiogram");
const ioCanvas = $<HTMLCanvasElement>("iocurve");
const presetSelect = $<HTMLSelectElement>("preset");
const alphaSlider = $<HTMLInputElement>("alpha");
const alphaLabel = $<HTMLSpanElement>("alpha-label");
const methodSelect = $<HTMLSelectElement>("method");
const splInput = $<HTMLInputElement>("spl");
const smearInput = $<HTMLInputElement>("smear");
const freqSelect = $<HTMLSelectElement>("io-freq");
const originalAudio = $<HTMLAudioElement>("audio-original");
const simulatedAudio = $<HTMLAudioElement>("audio-simulated");
const statusLine = $<HTMLSpanElement>("status");

function showBanner(text: string): void {
  banner.textContent = text;
  banner.hidden = text === "";
}

const editor = new AudiogramEditor(audiogramCanvas, (index, db) => {
  session = setPoint(session, index, db);
  presetSelect.value = "";
  persistAndReplot();
});

function persistAndReplot(): void {
  saveSession(session, localStorage);
  void refreshSplit();
  void refreshIoCurve();
}

async function refreshSplit(): Promise<void> {
  // the split is only defined server-side; inline audiograms use hlsplit of
  // the matching preset when selected, otherwise the lines are marked stale
  if (session.presetId === null) {
    editor.render(plotModel(session.hlDb, null, true));
    return;
  }
  try {
    const split = await api.hlSplit(session.presetId, session.alphaPercent / 100);
    editor.render(plotModel(session.hlDb, split, false));
    showBanner("");
  } catch (err) {
    editor.render(plotModel(session.hlDb, null, true));
    showBanner(`service unreachable: ${(err as Error).message}`);
  }
}

async function refreshIoCurve(): Promise<void> {
  try {
    const resp = await api.ioCurve(Number(freqSelect.value),
                                   session.alphaPercent / 100,
                                   session.presetId ?? undefined);
    renderIoPlot(ioCanvas, ioPlotModel(resp));
  } catch {
    // leave the previous plot; the banner already reports connectivity
  }
}

async function runSimulation(): Promise<void> {
  if (pendingClip === null && session.inputClipId === null) {
    showBanner("record or choose a clip first");
    return;
  }
  statusLine.textContent = "processing...";
  try {
    const job = jobRequest(session, pendingClip ? null : session.inputClipId);
    const result = await api.simulate(job, pendingClip);
    if (result.clipId) {
      session = { ...session, inputClipId: result.clipId };
      saveSession(session, localStorage);
    }
    pendingClip = null;
    simulatedAudio.src = URL.createObjectURL(result.audio);
    statusLine.textContent = "done";
  } catch (err) {
    if ((err as Error).name === "AbortError") return;
    statusLine.textContent = "failed";
    showBanner(`simulation failed: ${(err as Error).message}`);
  }
}

async function init(): Promise<void> {
  try {
    const { presets } = await api.presets();
    presetSelect.innerHTML = presets
      .map((p) => `<option value="${p.id}">${p.name}</option>`)
      .join("") + '<option value="">custom</option>';
    if (session.presetId && presets.some((p) => p.id === session.presetId)) {
      presetSelect.value = session.presetId;
      const preset = presets.find((p) => p.id === session.presetId)!;
      session = { ...session, freqsHz: [...preset.freqs_hz], hlDb: [...preset.hl_db] };
    }
  } catch (err) {
    showBanner(`service unreachable: ${(err as Error).message}`);
  }

  alphaSlider.value = String(session.alphaPercent);
  alphaLabel.textContent = `${session.alphaPercent}%`;
  methodSelect.value = session.method;
  splInput.value = String(session.spl);
  smearInput.value = session.smearCutoffHz === null ? "" : String(session.smearCutoffHz);

  presetSelect.addEventListener("change", async () => {
    const id = presetSelect.value || null;
    if (id) {
      const { presets } = await api.presets();
      const preset = presets.find((p) => p.id === id);
      if (preset) {
        session = { ...session, presetId: id, audiogramName: preset.name,
                    freqsHz: [...preset.freqs_hz], hlDb: [...preset.hl_db] };
      }
    } else {
      session = { ...session, presetId: null, audiogramName: "custom" };
    }
    persistAndReplot();
  });

  alphaSlider.addEventListener("input", () => {
    session = setAlphaPercent(session, Number(alphaSlider.value));
    alphaLabel.textContent = `${session.alphaPercent}%`;
    persistAndReplot();
  });

  methodSelect.addEventListener("change", () => {
    session = { ...session, method: methodSelect.value as UiSession["method"] };
    saveSession(session, localStorage);
    if (session.inputClipId || pendingClip) void runSimulation();
  });

  splInput.addEventListener("change", () => {
    session = { ...session, spl: Number(splInput.value) };
    saveSession(session, localStorage);
  });

  smearInput.addEventListener("change", () => {
    const v = smearInput.value.trim();
    session = { ...session, smearCutoffHz: v === "" ? null : Number(v) };
    saveSession(session, localStorage);
  });

  freqSelect.addEventListener("change", () => void refreshIoCurve());

  $<HTMLButtonElement>("record").addEventListener("click", async (ev) => {
    const button = ev.currentTarget as HTMLButtonElement;
    if (!recorder.active) {
      await recorder.start();
      button.textContent = "stop recording";
      statusLine.textContent = "recording...";
    } else {
      const wav = await recorder.stop();
      button.textContent = "record";
      pendingClip = wav;
      originalAudio.src = URL.createObjectURL(wav);
      statusLine.textContent = "clip ready";
    }
  });

  $<HTMLInputElement>("upload").addEventListener("change", async (ev) => {
    const input = ev.currentTarget as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      pendingClip = await fileToUploadWav(file, new AudioContext());
      originalAudio.src = URL.createObjectURL(pendingClip);
      statusLine.textContent = "clip ready";
    } catch (err) {
      showBanner(`unsupported file: ${(err as Error).message}`);
    }
  });

  $<HTMLButtonElement>("simulate").addEventListener("click", () => void runSimulation());

  session = session.presetId === undefined ? defaultSession() : session;
  persistAndReplot();
}

void init();
