"""Shared fixtures: filterbank tables are expensive, so build them once."""

from __future__ import annotations

import numpy as np
import pytest

from hisim import CalibratedSignal, GcfbConfig, build_filterbank
from hisim.presets import get_preset

FS = 48000


@pytest.fixture(scope="session")
def table100():
    return build_filterbank(GcfbConfig(fs=FS, n_ch=100))


@pytest.fixture(scope="session")
def aud80():
    return get_preset("80yr-male")


@pytest.fixture(scope="session")
def flat0():
    return get_preset("flat-0")


def calibrated(samples, fs=FS, spl_ref=94.0) -> CalibratedSignal:
    return CalibratedSignal(np.asarray(samples, dtype=float), fs, spl_ref)


def make_speech_like(seed: int, duration: float = 1.4, fs: int = FS) -> np.ndarray:
    """Deterministic speech-like clip: voiced formant sweeps with syllabic
    gating plus unvoiced bursts.  Stands in for a recorded corpus."""
    rng = np.random.default_rng(seed)
    n = int(duration * fs)
    t = np.arange(n) / fs

    f0 = 110.0 + 60.0 * rng.random() + 25.0 * np.sin(2 * np.pi * (1.3 + rng.random()) * t)
    phase = 2 * np.pi * np.cumsum(f0) / fs

    def wander(lo, hi, rate):
        x = rng.standard_normal(int(duration * rate) + 2)
        xi = np.interp(t, np.linspace(0, duration, len(x)), x)
        return lo + (hi - lo) * (0.5 + 0.5 * np.tanh(xi))

    formants = [wander(300, 900, 3), wander(900, 2300, 3), wander(2200, 3400, 2)]
    bws = [120.0, 160.0, 220.0]

    voiced = np.zeros(n)
    for h in range(1, 40):
        fh = h * f0
        amp = np.zeros(n)
        for fc, bw in zip(formants, bws):
            amp += np.exp(-0.5 * ((fh - fc) / bw) ** 2)
        amp *= (fh < 5000) / (1.0 + (fh / 800.0) ** 1.2)
        voiced += amp * np.sin(h * phase + rng.random() * 2 * np.pi)

    gate_src = rng.random(int(duration * 8) + 2) > 0.3
    gate = np.interp(t, np.linspace(0, duration, len(gate_src)), gate_src.astype(float))
    win = int(0.030 * fs)
    gate = np.convolve(gate, np.hanning(win) / np.hanning(win).sum(), mode="same")
    voiced *= gate

    noise = rng.standard_normal(n)
    spec = np.fft.rfft(noise)
    freqs = np.fft.rfftfreq(n, 1 / fs)
    spec *= np.exp(-0.5 * ((freqs - 3500) / 1500.0) ** 2)
    frying = np.fft.irfft(spec, n)
    burst_gate = np.zeros(n)
    for _ in range(int(duration * 3)):
        at = rng.integers(0, n - win)
        burst_gate[at:at + win] += np.hanning(win)
    unvoiced = frying * np.clip(burst_gate, 0, 1) * (1.0 - gate * 0.7)

    x = voiced + 0.35 * unvoiced * np.std(voiced) / (np.std(unvoiced) + 1e-12)
    return x / np.max(np.abs(x)) * 0.5
