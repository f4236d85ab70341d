// REST client for the simulation service. At most one simulate request is
// in flight: starting a new one cancels the previous (cancel-latest-wins).

export interface PresetInfo {
  id: string;
  name: string;
  freqs_hz: number[];
  hl_db: number[];
}

export interface HlSplitPoint {
  freq_hz: number;
  hl_total_db: number;
  hl_act_db: number;
  hl_pas_db: number;
  alpha: number;
}

export interface HlSplitResponse {
  audiogram_id: string;
  alpha: number;
  points: HlSplitPoint[];
}

export interface IoCurveResponse {
  freq_hz: number;
  fp1_hz: number;
  threshold_input_db: number;
  p_in_db: number[];
  nh_db: number[];
  hi_db?: number[];
  hl_total_db?: number;
  alpha_compensated?: number;
}

export interface SimulateResult {
  audio: Blob;
  clipId: string | null;
}

type FetchLike = typeof fetch;

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;
  private inflightSimulate: AbortController | null = null;

  constructor(base = "", fetchImpl: FetchLike = fetch) {
    this.base = base;
    this.fetchImpl = fetchImpl;
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.base + path);
    if (!res.ok) {
      throw new Error(`${path}: ${res.status} ${await res.text()}`);
    }
    return (await res.json()) as T;
  }

  presets(): Promise<{ presets: PresetInfo[] }> {
    return this.getJson("/api/presets");
  }

  hlSplit(audiogramId: string, alpha: number): Promise<HlSplitResponse> {
    const q = new URLSearchParams({ audiogram_id: audiogramId, alpha: String(alpha) });
    return this.getJson(`/api/hlsplit?${q}`);
  }

  ioCurve(freq: number, alpha: number, audiogramId?: string): Promise<IoCurveResponse> {
    const q = new URLSearchParams({ freq: String(freq), alpha: String(alpha) });
    if (audiogramId) q.set("audiogram_id", audiogramId);
    return this.getJson(`/api/iofunc?${q}`);
  }

  /** Run a simulation; a newer call aborts the one still in flight. */
  async simulate(job: Record<string, unknown>, wav: Blob | null): Promise<SimulateResult> {
    this.inflightSimulate?.abort();
    const controller = new AbortController();
    this.inflightSimulate = controller;

    const form = new FormData();
    if (wav !== null) {
      form.append("file", wav, "clip.wav");
    }
    form.append("params", JSON.stringify(job));
    try {
      const res = await this.fetchImpl(this.base + "/api/simulate", {
        method: "POST",
        body: form,
        signal: controller.signal,
      });
      if (!res.ok) {
        throw new Error(`simulate failed: ${res.status} ${await res.text()}`);
      }
      return { audio: await res.blob(), clipId: res.headers.get("X-Clip-Id") };
    } finally {
      if (this.inflightSimulate === controller) {
        this.inflightSimulate = null;
      }
    }
  }
}
