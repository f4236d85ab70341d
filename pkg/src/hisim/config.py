"""Application configuration: defaults, JSON config files, and overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

from .audio_io import DEFAULT_SPL_REF
from .filterbank import GcfbConfig
from .filters import GcParams
from .hearing import AudiogramError, ThresholdReference


@dataclass
class AppConfig:
    fs: float = 48000.0
    n_ch: int = 100
    f_lo: float = 100.0
    f_hi: float | None = None
    p_gain0: float = 100.0
    spl_ref: float = DEFAULT_SPL_REF
    workers: int = 0
    threshold: ThresholdReference = field(default_factory=ThresholdReference)
    params: GcParams = field(default_factory=GcParams)

    def gcfb(self) -> GcfbConfig:
        return GcfbConfig(fs=self.fs, n_ch=self.n_ch, f_lo=self.f_lo, f_hi=self.f_hi,
                          p_gain0=self.p_gain0, workers=self.workers)


_SCALAR_CASTS = {"fs": float, "n_ch": int, "f_lo": float, "f_hi": float,
                 "p_gain0": float, "spl_ref": float, "workers": int}


def load_config(path) -> AppConfig:
    """Read a JSON config file; unknown keys are rejected with a clear message."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid JSON in config {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise ValueError("config file must hold a JSON object")

    known = set(_SCALAR_CASTS) | {"threshold_table", "gc_params"}
    unknown = set(obj) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    cfg = AppConfig()
    for key, cast in _SCALAR_CASTS.items():
        if key in obj and obj[key] is not None:
            setattr(cfg, key, cast(obj[key]))
    if "threshold_table" in obj:
        table = obj["threshold_table"]
        if not isinstance(table, dict) or "freqs_hz" not in table:
            raise AudiogramError("threshold_table must be an object with freqs_hz")
        values = table.get("spl_db", table.get("hl_db"))
        if values is None:
            raise AudiogramError("threshold_table needs 'spl_db' (or 'hl_db') values")
        cfg.threshold = ThresholdReference(tuple(float(f) for f in table["freqs_hz"]),
                                           tuple(float(v) for v in values))
    if "gc_params" in obj:
        raw = obj["gc_params"]
        if not isinstance(raw, dict):
            raise ValueError("gc_params must be an object")
        valid = {f.name for f in fields(GcParams)}
        bad = set(raw) - valid
        if bad:
            raise ValueError(f"unknown gc_params keys: {sorted(bad)}")
        cfg.params = GcParams(**raw)
    return cfg
