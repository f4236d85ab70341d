import { describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";

function jsonResponse(body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status: 200,
    headers: { "content-type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("queries the split endpoint with audiogram and alpha", async () => {
    const fetchMock = vi.fn(async (input: RequestInfo | URL) => {
      expect(String(input)).toBe("/api/hlsplit?audiogram_id=80yr-male&alpha=0.5");
      return jsonResponse({ audiogram_id: "80yr-male", alpha: 0.5, points: [] });
    });
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    const resp = await client.hlSplit("80yr-male", 0.5);
    expect(resp.alpha).toBe(0.5);
    expect(fetchMock).toHaveBeenCalledOnce();
  });

  it("raises on error responses", async () => {
    const fetchMock = vi.fn(async () => new Response("boom", { status: 400 }));
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    await expect(client.presets()).rejects.toThrow(/400/);
  });

  it("sends multipart simulate requests", async () => {
    const fetchMock = vi.fn(async (_url: RequestInfo | URL, init?: RequestInit) => {
      const form = init?.body as FormData;
      expect(form.get("params")).toContain("\"alpha\":0.5");
      expect((form.get("file") as File).name).toBe("clip.wav");
      return new Response(new Blob([new Uint8Array([82, 73, 70, 70])]), {
        status: 200,
        headers: { "X-Clip-Id": "clip-9" },
      });
    });
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    const result = await client.simulate({ alpha: 0.5 }, new Blob([new Uint8Array(4)]));
    expect(result.clipId).toBe("clip-9");
    expect(await result.audio.arrayBuffer()).toBeTruthy();
  });

  it("cancels the in-flight simulate when a new one starts", async () => {
    const seenSignals: AbortSignal[] = [];
    const fetchMock = vi.fn((_url: RequestInfo | URL, init?: RequestInit) => {
      const signal = init!.signal!;
      seenSignals.push(signal);
      return new Promise<Response>((resolve, reject) => {
        signal.addEventListener("abort", () => {
          const err = new Error("aborted");
          err.name = "AbortError";
          reject(err);
        });
        setTimeout(() => resolve(new Response(new Blob(), { status: 200 })), 40);
      });
    });
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    const first = client.simulate({}, null);
    const second = client.simulate({}, null);
    await expect(first).rejects.toThrow(/aborted/);
    await expect(second).resolves.toBeTruthy();
    expect(seenSignals[0].aborted).toBe(true);
    expect(seenSignals[1].aborted).toBe(false);
  });
});
