// Live round trip against the real local service: upload a generated clip
// through the same client code the UI uses, simulate, and check the result
// is a playable WAV of matching duration.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { encodeWav, UPLOAD_RATE } from "../src/audio.js";

const PORT = 8941;
const BASE = `http://127.0.0.1:${PORT}`;

function pythonAvailable(): boolean {
  const probe = spawnSync("python3", ["-c", "import hisim"], { timeout: 30000 });
  return probe.status === 0;
}

const haveService = pythonAvailable();
let server: ChildProcess | null = null;

async function waitForService(): Promise<void> {
  for (let i = 0; i < 120; i++) {
    try {
      const res = await fetch(`${BASE}/api/presets`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 500));
  }
  throw new Error("service did not come up");
}

describe.skipIf(!haveService)("live service round trip", () => {
  beforeAll(async () => {
    server = spawn("python3", ["-m", "hisim.cli", "serve", "--port", String(PORT),
                               "--bind", "127.0.0.1"],
                   { stdio: "ignore" });
    await waitForService();
  }, 90000);

  afterAll(() => {
    server?.kill("SIGTERM");
  });

  it("lists the built-in audiograms", async () => {
    const client = new ApiClient(BASE);
    const { presets } = await client.presets();
    const ids = presets.map((p) => p.id);
    expect(ids).toContain("80yr-male");
    const table = presets.find((p) => p.id === "80yr-male")!;
    expect(table.hl_db[table.freqs_hz.indexOf(4000)]).toBeCloseTo(48.3, 5);
  });

  it("reports no active loss at full compression health", async () => {
    const client = new ApiClient(BASE);
    const split = await client.hlSplit("80yr-male", 1.0);
    for (const point of split.points) {
      expect(Math.abs(point.hl_act_db)).toBeLessThan(1e-6);
    }
  });

  it("uploads a clip, simulates, and reuses the cached clip", async () => {
    const client = new ApiClient(BASE);
    const seconds = 0.5;
    const n = Math.round(seconds * UPLOAD_RATE);
    const samples = new Float32Array(n);
    for (let i = 0; i < n; i++) {
      samples[i] = 0.2 * Math.sin((2 * Math.PI * 800 * i) / UPLOAD_RATE)
        * (1 + 0.4 * Math.sin((2 * Math.PI * 4 * i) / UPLOAD_RATE));
    }
    const wav = new Blob([encodeWav(samples, UPLOAD_RATE)], { type: "audio/wav" });

    const job = { audiogram: "80yr-male", alpha: 0.5, method: "dtvf", spl: 65 };
    const result = await client.simulate(job, wav);
    expect(result.clipId).toBeTruthy();

    const bytes = new Uint8Array(await result.audio.arrayBuffer());
    const riff = new TextDecoder().decode(bytes.subarray(0, 4));
    expect(riff).toBe("RIFF");
    // float32 payload: duration within one analysis frame of the input
    const outSamples = (bytes.length - 44) / 4;
    expect(Math.abs(outSamples - n)).toBeLessThanOrEqual(UPLOAD_RATE * 0.001);

    const again = await client.simulate({ ...job, method: "fbas", clip_id: result.clipId },
                                        null);
    expect((await again.audio.arrayBuffer()).byteLength).toBeGreaterThan(44);
  }, 120000);
});
