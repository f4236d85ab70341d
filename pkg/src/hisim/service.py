"""HTTP service consumed by the companion UI.

Stateless per request apart from a bounded in-memory store of uploaded
clips, so the UI can re-run a simulation with new parameters without
re-uploading audio.  Audio is never persisted to disk.
"""

from __future__ import annotations

import io
import json
import threading
import uuid
from collections import OrderedDict
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, Query, Request, UploadFile
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from scipy.io import wavfile

from .audio_io import (AudioIoError, CalibratedSignal, SUPPORTED_FS, pcm_to_float,
                       save_wav, set_leq)
from .config import AppConfig
from .filterbank import ExcitationPattern
from .hearing import (AudiogramError, AlphaProfile, Audiogram, ChannelIoModel,
                      parse_audiogram_json, split_hearing_loss)
from .pipeline import METHODS, analyze_signal, filterbank_for, simulate
from .presets import PRESET_AUDIOGRAMS

MAX_BODY_BYTES = 50 * 1024 * 1024
CLIP_CACHE_SIZE = 32


class ClipCache:
    """Thread-safe bounded LRU of uploaded clips."""

    def __init__(self, maxsize: int = CLIP_CACHE_SIZE):
        self._data: OrderedDict[str, bytes] = OrderedDict()
        self._lock = threading.Lock()
        self._maxsize = maxsize

    def put(self, payload: bytes) -> str:
        clip_id = uuid.uuid4().hex
        with self._lock:
            self._data[clip_id] = payload
            while len(self._data) > self._maxsize:
                self._data.popitem(last=False)
        return clip_id

    def get(self, clip_id: str) -> bytes | None:
        with self._lock:
            payload = self._data.get(clip_id)
            if payload is not None:
                self._data.move_to_end(clip_id)
            return payload


def _decode_wav(payload: bytes, spl_ref: float) -> CalibratedSignal:
    try:
        fs, data = wavfile.read(io.BytesIO(payload))
    except Exception as exc:
        raise HTTPException(status_code=400, detail=f"unreadable WAV payload: {exc}")
    if data.ndim == 2:
        samples = data.astype(np.float64).mean(axis=1)
    else:
        samples = pcm_to_float(data, data.dtype)
    if int(fs) not in SUPPORTED_FS:
        raise HTTPException(status_code=422,
                            detail=f"unsupported sampling rate {fs}; use one of {SUPPORTED_FS}")
    try:
        return CalibratedSignal(samples, int(fs), spl_ref)
    except AudioIoError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


def _resolve_audiogram(ref, alpha_value) -> tuple[Audiogram, AlphaProfile]:
    if isinstance(ref, str):
        if ref not in PRESET_AUDIOGRAMS:
            raise HTTPException(status_code=400, detail=f"unknown audiogram preset '{ref}'")
        audiogram, alpha = PRESET_AUDIOGRAMS[ref], None
    elif isinstance(ref, dict):
        try:
            audiogram, alpha = parse_audiogram_json(ref)
        except AudiogramError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
    else:
        raise HTTPException(status_code=400, detail="audiogram must be a preset id or object")
    if alpha_value is not None:
        try:
            if isinstance(alpha_value, (list, tuple)):
                alpha = AlphaProfile(tuple(float(v) for v in alpha_value), audiogram.freqs_hz)
            else:
                alpha = AlphaProfile.constant(float(alpha_value), audiogram.freqs_hz)
        except (AudiogramError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"invalid alpha: {exc}")
    return audiogram, alpha or AlphaProfile.constant(1.0, audiogram.freqs_hz)


def _downsample_pattern(ep: ExcitationPattern, max_frames: int = 400) -> dict:
    levels = ep.levels
    times = ep.times
    if ep.n_frames > max_frames:
        stride = int(np.ceil(ep.n_frames / max_frames))
        cut = (ep.n_frames // stride) * stride
        levels = levels[:, :cut].reshape(ep.n_ch, -1, stride).max(axis=2)
        times = times[:cut:stride]
    return {
        "fp1_hz": [round(float(v), 3) for v in ep.fp1],
        "times_s": [round(float(t), 6) for t in times],
        "levels_db": np.round(levels, 3).tolist(),
        "frame_shift_s": ep.frame_shift,
    }


def create_app(config: AppConfig | None = None, static_dir: str | None = None) -> FastAPI:
    config = config or AppConfig()
    app = FastAPI(title="hisim service")
    clips = ClipCache()

    @app.middleware("http")
    async def limit_body(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and int(length) > MAX_BODY_BYTES:
            return JSONResponse(status_code=413, content={"detail": "request too large"})
        return await call_next(request)

    @app.get("/api/presets")
    def presets():
        return {
            "presets": [
                {"id": name, "name": a.name, "freqs_hz": list(a.freqs_hz),
                 "hl_db": list(a.hl_db)}
                for name, a in PRESET_AUDIOGRAMS.items()
            ]
        }

    @app.get("/api/hlsplit")
    def hlsplit(audiogram_id: str = Query(...), alpha: float = Query(...)):
        audiogram, _ = _resolve_audiogram(audiogram_id, None)
        if not 0.0 <= alpha <= 1.0:
            raise HTTPException(status_code=400, detail="alpha must lie in [0, 1]")
        rows = []
        for f, hl in zip(audiogram.freqs_hz, audiogram.hl_db):
            model = ChannelIoModel(float(f), config.threshold.level(float(f)),
                                   config.params, config.p_gain0)
            split = split_hearing_loss(float(hl), float(alpha), model)
            rows.append({"freq_hz": f, "hl_total_db": split.hl_total,
                         "hl_act_db": round(split.hl_act, 3),
                         "hl_pas_db": round(split.hl_pas, 3),
                         "alpha": round(split.alpha, 4)})
        return {"audiogram_id": audiogram_id, "alpha": alpha, "points": rows}

    @app.get("/api/iofunc")
    def iofunc(freq: float = Query(...), alpha: float = Query(...),
               audiogram_id: str | None = Query(None)):
        if not 0.0 <= alpha <= 1.0:
            raise HTTPException(status_code=400, detail="alpha must lie in [0, 1]")
        table = filterbank_for(config)
        ch = int(np.argmin(np.abs(table.fp1 - freq)))
        model = table.io_models[ch]
        nh = model.curve(1.0)
        out = {
            "freq_hz": freq,
            "fp1_hz": round(float(table.fp1[ch]), 2),
            "threshold_input_db": round(model.p_at, 2),
            "p_in_db": np.round(nh.p_in[::10], 1).tolist(),
            "nh_db": np.round(nh.p_out[::10], 3).tolist(),
        }
        if audiogram_id is not None:
            audiogram, _ = _resolve_audiogram(audiogram_id, None)
            hl = float(audiogram.level(float(table.fp1[ch])))
            split = split_hearing_loss(hl, alpha, model)
            hi = model.curve(split.alpha)
            out["hi_db"] = np.round(hi.p_out[::10] - split.l_pas, 3).tolist()
            out["hl_total_db"] = hl
            out["alpha_compensated"] = round(split.alpha, 4)
        return out

    async def _signal_from_request(file: UploadFile | None, params: dict) -> tuple:
        clip_id = params.get("clip_id")
        if file is not None:
            payload = await file.read()
            if len(payload) > MAX_BODY_BYTES:
                raise HTTPException(status_code=413, detail="audio payload too large")
            clip_id = clips.put(payload)
        elif clip_id:
            payload = clips.get(clip_id)
            if payload is None:
                raise HTTPException(status_code=400, detail=f"unknown clip_id {clip_id!r}")
        else:
            raise HTTPException(status_code=400, detail="provide an audio file or clip_id")
        return _decode_wav(payload, config.spl_ref), clip_id

    @app.post("/api/simulate")
    async def simulate_endpoint(file: UploadFile | None = File(None),
                                params: str = Form(...)):
        try:
            job = json.loads(params)
        except json.JSONDecodeError as exc:
            raise HTTPException(status_code=400, detail=f"params is not valid JSON: {exc}")
        if not isinstance(job, dict):
            raise HTTPException(status_code=400, detail="params must be a JSON object")
        method = job.get("method", "dtvf")
        if method not in METHODS:
            raise HTTPException(status_code=400, detail=f"method must be one of {METHODS}")
        spl = job.get("spl")
        if spl is not None and not (0.0 <= float(spl) <= 110.0):
            raise HTTPException(status_code=400, detail="spl must lie in [0, 110] dB")
        smear = job.get("smear_cutoff_hz")
        if smear is not None and method != "fbas":
            raise HTTPException(status_code=400,
                                detail="smear_cutoff_hz requires the fbas method")
        audiogram, alpha = _resolve_audiogram(job.get("audiogram", "flat-0"),
                                              job.get("alpha"))

        signal, clip_id = await _signal_from_request(file, job)
        if spl is not None:
            try:
                signal = set_leq(signal, float(spl))
            except AudioIoError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        cfg = AppConfig(**{**config.__dict__, "fs": signal.fs})
        table = filterbank_for(cfg)
        try:
            result = simulate(signal, audiogram, alpha, table, method=method,
                              smear_cutoff_hz=smear)
        except (ValueError, AudiogramError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        buf = io.BytesIO()
        save_wav(result.output, buf)
        return Response(content=buf.getvalue(), media_type="audio/wav",
                        headers={"X-Clip-Id": clip_id})

    @app.post("/api/analyze")
    async def analyze_endpoint(file: UploadFile | None = File(None),
                               params: str = Form("{}")):
        try:
            job = json.loads(params)
        except json.JSONDecodeError as exc:
            raise HTTPException(status_code=400, detail=f"params is not valid JSON: {exc}")
        signal, clip_id = await _signal_from_request(file, job)
        if job.get("spl") is not None:
            try:
                signal = set_leq(signal, float(job["spl"]))
            except AudioIoError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        audiogram = alpha = None
        if job.get("audiogram") is not None:
            audiogram, alpha = _resolve_audiogram(job["audiogram"], job.get("alpha"))
        cfg = AppConfig(**{**config.__dict__, "fs": signal.fs})
        table = filterbank_for(cfg)
        ep = analyze_signal(signal, table, audiogram,
                            alpha if alpha is not None else 1.0)
        body = _downsample_pattern(ep)
        body["clip_id"] = clip_id
        return body

    if static_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = str(bundled) if bundled.is_dir() else None
    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
