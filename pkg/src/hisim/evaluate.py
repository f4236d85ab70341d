"""Quantitative evaluation: IO sweeps, bandwidth measures, spectral distance,
and pink-noise references."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .erbscale import erb_bandwidth
from .filterbank import ChannelTable, ExcitationPattern, analyze
from .framing import DB_FLOOR
from .hearing import HearingSpec

SWEEP_LEVELS = np.arange(-10.0, 100.1, 10.0)


@dataclass
class CalibratedTone:
    samples: np.ndarray
    fs: float
    spl_ref: float


def make_tone(freq_hz: float, duration: float, fs: float, spl_db: float,
              spl_ref: float = 94.0, ramp: float = 0.005) -> CalibratedTone:
    """Sinusoid at a given SPL with raised-cosine onset/offset ramps."""
    n = int(round(duration * fs))
    t = np.arange(n) / fs
    amp = np.sqrt(2.0) * 10.0 ** ((spl_db - spl_ref) / 20.0)
    x = amp * np.sin(2.0 * np.pi * freq_hz * t)
    n_ramp = min(int(round(ramp * fs)), n // 2)
    if n_ramp > 0:
        shape = 0.5 - 0.5 * np.cos(np.pi * np.arange(n_ramp) / n_ramp)
        x[:n_ramp] *= shape
        x[-n_ramp:] *= shape[::-1]
    return CalibratedTone(x, fs, spl_ref)


@dataclass
class IoSweepResult:
    freq_hz: float
    levels: np.ndarray
    outputs: np.ndarray
    zero_cross: float          # nan when the curve never crosses 0 dB
    label: str = ""
    below_floor: bool = False


def sweep_io(freqs, table: ChannelTable, hearing: HearingSpec | None = None,
             levels: np.ndarray = SWEEP_LEVELS, duration: float = 0.2,
             spl_ref: float = 94.0, label: str = "") -> list[IoSweepResult]:
    """Measure the IO function with short tones; output is the excitation maximum.

    The zero-cross input level is linearly interpolated between the two
    levels bracketing 0 dB output.
    """
    results = []
    for f in np.atleast_1d(np.asarray(freqs, dtype=float)):
        outs = np.empty(len(levels))
        for i, level in enumerate(levels):
            tone = make_tone(float(f), duration, table.config.fs, float(level), spl_ref)
            ep = analyze(tone, table, hearing)
            outs[i] = float(ep.levels.max())
        floor_flag = bool(np.all(outs <= DB_FLOOR + 0.5))
        zero = float("nan")
        above = np.nonzero(outs > 0.0)[0]
        if above.size and above[0] > 0:
            i = above[0]
            zero = float(np.interp(0.0, outs[i - 1:i + 1], levels[i - 1:i + 1]))
        results.append(IoSweepResult(freq_hz=float(f), levels=np.asarray(levels, float),
                                     outputs=outs, zero_cross=zero, label=label,
                                     below_floor=floor_flag))
    return results


@dataclass
class BandwidthResult:
    freq_hz: float
    fp1: float
    alpha: float
    erb_hz: float
    ratio_vs_alpha1: float
    ratio_vs_erbn: float


def measure_bandwidth(freq_hz: float, alpha: float, table: ChannelTable) -> BandwidthResult:
    """Equivalent rectangular bandwidth of the cascade at the nearest channel.

    Numeric integral of the squared magnitude over the design grid divided
    by the squared peak.
    """
    ch = int(np.argmin(np.abs(table.fp1 - freq_hz)))

    def erb_of(a: float) -> float:
        mag = table.cascade_magnitude(ch, a)
        power = mag * mag
        return float(np.trapezoid(power, table.grid) / power.max())

    erb_alpha = erb_of(float(alpha))
    erb_ref = erb_of(1.0)
    fp1 = float(table.fp1[ch])
    return BandwidthResult(freq_hz=float(freq_hz), fp1=fp1, alpha=float(alpha),
                           erb_hz=erb_alpha, ratio_vs_alpha1=erb_alpha / erb_ref,
                           ratio_vs_erbn=erb_alpha / erb_bandwidth(fp1))


@dataclass
class DistanceResult:
    d_sp: float
    shift_frames: int
    per_shift: dict = field(default_factory=dict)


def spectral_distance(s_test, s_ref, search_range: float = 0.010,
                      floor_db: float = -100.0) -> DistanceResult:
    """Normalized spectral distance in dB, minimized over a small frame shift.

    Both inputs may be excitation patterns (converted to linear amplitude)
    or already-linear matrices.  Frames that cannot overlap at the maximum
    shift are excluded symmetrically so every shift compares the same
    reference region.
    """
    test, shift_s = _as_linear(s_test)
    ref, shift_ref = _as_linear(s_ref)
    frame_shift = shift_s or shift_ref or 0.0005
    if test.shape[0] != ref.shape[0]:
        raise ValueError("spectrograms must have the same channel count")
    n = min(test.shape[1], ref.shape[1])
    test, ref = test[:, :n], ref[:, :n]
    max_shift = int(round(search_range / frame_shift))
    if n <= 2 * max_shift + 1:
        raise ValueError("spectrograms are too short for the shift search range")

    lo, hi = max_shift, n - max_shift
    ref_block = ref[:, lo:hi]
    denom = float(np.sum(ref_block ** 2))
    if denom == 0.0:
        raise ValueError("reference spectrogram is empty over the comparison region")

    per_shift = {}
    best = (np.inf, 0)
    for shift in range(-max_shift, max_shift + 1):
        num = float(np.sum((test[:, lo + shift:hi + shift] - ref_block) ** 2))
        per_shift[shift] = num / denom
        if per_shift[shift] < best[0]:
            best = (per_shift[shift], shift)
    ratio, shift = best
    d_sp = floor_db if ratio <= 0.0 else max(10.0 * np.log10(ratio), floor_db)
    return DistanceResult(d_sp=float(d_sp), shift_frames=int(shift),
                          per_shift=per_shift)


def _as_linear(s) -> tuple[np.ndarray, float | None]:
    if isinstance(s, ExcitationPattern):
        return s.linear_amplitude(), s.frame_shift
    return np.asarray(s, dtype=float), None


def pink_noise(n_samples: int, seed: int) -> np.ndarray:
    """Seeded pink noise (power falling 3 dB per octave) via spectral shaping."""
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(n_samples)
    spec = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n_samples)
    spec[0] = 0.0
    spec[1:] /= np.sqrt(freqs[1:])
    noise = np.fft.irfft(spec, n_samples)
    return noise / np.sqrt(np.mean(noise ** 2))


def pink_noise_mix(speech: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """Add pink noise scaled so the speech-to-noise level difference is ``snr_db``."""
    x = np.asarray(speech, dtype=float)
    if x.size == 0:
        raise ValueError("speech signal is empty")
    speech_rms = float(np.sqrt(np.mean(x ** 2)))
    noise = pink_noise(len(x), seed)
    noise *= speech_rms * 10.0 ** (-snr_db / 20.0)
    return x + noise
