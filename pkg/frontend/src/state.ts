// Session state: the one mutable record behind the UI. Everything that the
// panels display about hearing loss comes from API responses; this module
// only keeps user-chosen parameters and enforces their editing rules.

export const AUDIOMETRIC_FREQS = [125, 250, 500, 1000, 2000, 4000, 8000] as const;

export const HL_MIN = -10;
export const HL_MAX = 120;

export type Method = "dtvf" | "fbas";

export interface UiSession {
  presetId: string | null;        // null once the user edits a point
  audiogramName: string;
  freqsHz: number[];
  hlDb: number[];
  alphaPercent: number;           // 0..100
  method: Method;
  spl: number;
  smearCutoffHz: number | null;   // fbas only
  inputClipId: string | null;     // server-side cache reference
}

export function defaultSession(): UiSession {
  return {
    presetId: "flat-0",
    audiogramName: "flat-0",
    freqsHz: [...AUDIOMETRIC_FREQS],
    hlDb: AUDIOMETRIC_FREQS.map(() => 0),
    alphaPercent: 100,
    method: "dtvf",
    spl: 65,
    smearCutoffHz: null,
    inputClipId: null,
  };
}

/** Hearing-level edits snap to 1 dB and clamp to the audiometric range. */
export function snapHearingLevel(raw: number): number {
  const snapped = Math.round(raw);
  return Math.min(HL_MAX, Math.max(HL_MIN, snapped));
}

export function setPoint(session: UiSession, index: number, rawDb: number): UiSession {
  const hlDb = session.hlDb.slice();
  hlDb[index] = snapHearingLevel(rawDb);
  return { ...session, hlDb, presetId: null, audiogramName: "custom" };
}

export function setAlphaPercent(session: UiSession, pct: number): UiSession {
  const alphaPercent = Math.min(100, Math.max(0, Math.round(pct)));
  return { ...session, alphaPercent };
}

export function alphaFraction(session: UiSession): number {
  return session.alphaPercent / 100;
}

/** The JSON job the simulate endpoint expects. */
export function jobRequest(session: UiSession, clipId: string | null): Record<string, unknown> {
  const job: Record<string, unknown> = {
    audiogram: session.presetId ?? {
      name: session.audiogramName,
      freqs_hz: session.freqsHz,
      hl_db: session.hlDb,
    },
    alpha: alphaFraction(session),
    method: session.method,
    spl: session.spl,
  };
  if (session.method === "fbas" && session.smearCutoffHz !== null) {
    job.smear_cutoff_hz = session.smearCutoffHz;
  }
  if (clipId !== null) {
    job.clip_id = clipId;
  }
  return job;
}

const STORAGE_KEY = "hisim-session-v1";

export function serializeSession(session: UiSession): string {
  return JSON.stringify(session);
}

export function deserializeSession(text: string): UiSession {
  const raw = JSON.parse(text) as Partial<UiSession>;
  const base = defaultSession();
  const session: UiSession = { ...base, ...raw } as UiSession;
  if (!Array.isArray(session.freqsHz) || !Array.isArray(session.hlDb)
      || session.freqsHz.length !== session.hlDb.length) {
    throw new Error("corrupt session: audiogram lists do not match");
  }
  session.hlDb = session.hlDb.map(snapHearingLevel);
  session.alphaPercent = Math.min(100, Math.max(0, Math.round(session.alphaPercent)));
  if (session.method !== "dtvf" && session.method !== "fbas") {
    session.method = "dtvf";
  }
  return session;
}

export function saveSession(session: UiSession, storage: Pick<Storage, "setItem">): void {
  storage.setItem(STORAGE_KEY, serializeSession(session));
}

export function loadSession(storage: Pick<Storage, "getItem">): UiSession {
  const text = storage.getItem(STORAGE_KEY);
  if (!text) return defaultSession();
  try {
    return deserializeSession(text);
  } catch {
    return defaultSession();
  }
}
