// Browser audio: microphone capture, decoding, client-side resampling to
// 48 kHz mono, and 16-bit WAV encoding for upload.

export const UPLOAD_RATE = 48000;

/** Linear-interpolation resampler; adequate for speech-clip uploads. */
export function resampleLinear(input: Float32Array, fromRate: number,
                               toRate: number): Float32Array {
  if (fromRate === toRate) return input.slice();
  const outLen = Math.max(1, Math.round((input.length * toRate) / fromRate));
  const out = new Float32Array(outLen);
  const step = fromRate / toRate;
  for (let i = 0; i < outLen; i++) {
    const pos = i * step;
    const i0 = Math.floor(pos);
    const i1 = Math.min(i0 + 1, input.length - 1);
    const frac = pos - i0;
    out[i] = input[i0] * (1 - frac) + input[i1] * frac;
  }
  return out;
}

export function mixToMono(channels: Float32Array[]): Float32Array {
  if (channels.length === 1) return channels[0].slice();
  const n = Math.min(...channels.map((c) => c.length));
  const out = new Float32Array(n);
  for (const ch of channels) {
    for (let i = 0; i < n; i++) out[i] += ch[i] / channels.length;
  }
  return out;
}

/** Encode mono float samples as a 16-bit PCM RIFF/WAVE buffer. */
export function encodeWav(samples: Float32Array, sampleRate: number): ArrayBuffer {
  const bytesPerSample = 2;
  const dataSize = samples.length * bytesPerSample;
  const buffer = new ArrayBuffer(44 + dataSize);
  const view = new DataView(buffer);

  const writeAscii = (offset: number, text: string) => {
    for (let i = 0; i < text.length; i++) view.setUint8(offset + i, text.charCodeAt(i));
  };
  writeAscii(0, "RIFF");
  view.setUint32(4, 36 + dataSize, true);
  writeAscii(8, "WAVE");
  writeAscii(12, "fmt ");
  view.setUint32(16, 16, true);
  view.setUint16(20, 1, true);                    // PCM
  view.setUint16(22, 1, true);                    // mono
  view.setUint32(24, sampleRate, true);
  view.setUint32(28, sampleRate * bytesPerSample, true);
  view.setUint16(32, bytesPerSample, true);
  view.setUint16(34, 16, true);
  writeAscii(36, "data");
  view.setUint32(40, dataSize, true);
  for (let i = 0; i < samples.length; i++) {
    const v = Math.max(-1, Math.min(1, samples[i]));
    view.setInt16(44 + i * bytesPerSample, Math.round(v * 32767), true);
  }
  return buffer;
}

export function decodeWavPcm16(buffer: ArrayBuffer): { samples: Float32Array; rate: number } {
  const view = new DataView(buffer);
  const rate = view.getUint32(24, true);
  const n = view.getUint32(40, true) / 2;
  const samples = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    samples[i] = view.getInt16(44 + 2 * i, true) / 32768;
  }
  return { samples, rate };
}

/** Decode any uploaded audio file and normalize it to a 48 kHz mono WAV blob. */
export async function fileToUploadWav(file: Blob,
                                      ctx: Pick<AudioContext, "decodeAudioData">): Promise<Blob> {
  const decoded = await ctx.decodeAudioData(await file.arrayBuffer());
  const channels: Float32Array[] = [];
  for (let c = 0; c < decoded.numberOfChannels; c++) {
    channels.push(decoded.getChannelData(c).slice());
  }
  const mono = mixToMono(channels);
  const resampled = resampleLinear(mono, decoded.sampleRate, UPLOAD_RATE);
  return new Blob([encodeWav(resampled, UPLOAD_RATE)], { type: "audio/wav" });
}

export class Recorder {
  private recorder: MediaRecorder | null = null;
  private chunks: Blob[] = [];

  async start(): Promise<void> {
    const stream = await navigator.mediaDevices.getUserMedia({ audio: true });
    this.chunks = [];
    this.recorder = new MediaRecorder(stream);
    this.recorder.ondataavailable = (ev) => {
      if (ev.data.size > 0) this.chunks.push(ev.data);
    };
    this.recorder.start();
  }

  /** Stop the capture and return the 48 kHz mono WAV for upload. */
  async stop(): Promise<Blob> {
    const recorder = this.recorder;
    if (!recorder) throw new Error("recorder was not started");
    const done = new Promise<void>((resolve) => {
      recorder.onstop = () => resolve();
    });
    recorder.stop();
    recorder.stream.getTracks().forEach((t) => t.stop());
    await done;
    this.recorder = null;
    const raw = new Blob(this.chunks, { type: this.chunks[0]?.type ?? "audio/webm" });
    return fileToUploadWav(raw, new AudioContext());
  }

  get active(): boolean {
    return this.recorder !== null;
  }
}
