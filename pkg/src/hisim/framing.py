"""Hanning-windowed frame-RMS extraction and frame-to-sample gain resampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DB_FLOOR = -100.0
DEFAULT_FRAME_LEN = 0.001   # seconds
DEFAULT_FRAME_SHIFT = 0.0005


@dataclass
class FrameSeries:
    """Per-frame values on a regular frame grid.

    ``values`` may hold linear RMS amplitudes or dB levels depending on the
    producer; ``t0`` is the time of the first frame center.
    """

    values: np.ndarray
    frame_shift: float = DEFAULT_FRAME_SHIFT
    frame_len: float = DEFAULT_FRAME_LEN
    t0: float = 0.0

    def __post_init__(self):
        if self.frame_shift <= 0:
            raise ValueError("frame_shift must be positive")
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.values)) * self.frame_shift


def frame_count(n_samples: int, fs: float, frame_shift: float = DEFAULT_FRAME_SHIFT) -> int:
    if n_samples <= 0:
        return 0
    shift = max(1, int(round(frame_shift * fs)))
    return 1 + (n_samples - 1) // shift


def frame_rms(signal: np.ndarray, fs: float,
              frame_len: float = DEFAULT_FRAME_LEN,
              frame_shift: float = DEFAULT_FRAME_SHIFT) -> FrameSeries:
    """Hanning-weighted RMS per frame, normalized so constant input maps to itself.

    Frame k is centered at ``k * frame_shift``; edge frames see zero padding.
    The window's own RMS is divided out, so a constant signal of amplitude
    ``a`` yields ``a`` in every interior frame.
    """
    if fs < 8000:
        raise ValueError("sampling rate must be >= 8000 Hz")
    x = np.asarray(signal, dtype=float)
    if x.size == 0:
        return FrameSeries(np.zeros(0), frame_shift, frame_len, 0.0)

    win_len = max(2, int(round(frame_len * fs)))
    shift = max(1, int(round(frame_shift * fs)))
    window_sq = np.hanning(win_len) ** 2

    half = win_len // 2
    n_frames = 1 + (len(x) - 1) // shift
    padded = np.concatenate([np.zeros(half), x, np.zeros(win_len)])
    frames = np.lib.stride_tricks.sliding_window_view(padded, win_len)[::shift][:n_frames]
    # normalize by the window power inside the signal so edge frames are
    # unbiased and a constant input maps to itself in every frame
    inside = np.concatenate([np.zeros(half), np.ones(len(x)), np.zeros(win_len)])
    covered = np.lib.stride_tricks.sliding_window_view(inside, win_len)[::shift][:n_frames]
    win_power = covered @ window_sq
    mean_sq = (frames ** 2 @ window_sq) / np.maximum(win_power, 1e-300)
    return FrameSeries(np.sqrt(mean_sq), shift / fs, win_len / fs, 0.0)


def rms_to_db(values: np.ndarray, ref_db: float = 0.0, floor_db: float = DB_FLOOR) -> np.ndarray:
    """Convert linear RMS to dB re the calibration reference, floored."""
    v = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(np.maximum(v, 0.0)) + ref_db
    return np.maximum(db, floor_db)


def db_to_linear(db: np.ndarray) -> np.ndarray:
    return 10.0 ** (np.asarray(db, dtype=float) / 20.0)


def resample_gain(series: FrameSeries, fs: float, n_samples: int) -> np.ndarray:
    """Per-sample linear gains from a dB frame series.

    Interpolation is piecewise linear in dB between frame centers with the
    endpoint values held constant, then converted to linear gain.
    """
    if len(series) == 0:
        raise ValueError("cannot resample an empty frame series")
    t = np.arange(n_samples) / fs
    db = np.interp(t, series.times, series.values)
    return db_to_linear(db)
