"""Synthesis back ends for the simulator.

Two routes turn the loss field into audio: a direct time-varying filter
(per-frame minimum-phase kernels overlap-added with square-root hanning
windows) and a filterbank resynthesis (per-channel attenuation, delay
compensation, summation) that also supports temporal envelope smearing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import firwin, hilbert, oaconvolve

from .erbscale import hz_to_erb_rate
from .filterbank import ChannelTable
from .filters import MagnitudeSpectrum, design_minphase
from .lossfield import LossField


@dataclass(frozen=True)
class DtvfConfig:
    """Time-varying filter framing; the shift must be half the frame length."""

    frame_len: float = 0.020
    frame_shift: float = 0.010
    kernel_len: int | None = None   # default: one frame of taps
    n_bins: int = 2049

    def __post_init__(self):
        if abs(self.frame_shift * 2.0 - self.frame_len) > 1e-12:
            raise ValueError("frame_shift must equal frame_len / 2 for exact overlap-add")
        if self.n_bins < 129:
            raise ValueError("n_bins too small for a usable loss spectrum")


@dataclass(frozen=True)
class SmearConfig:
    """Temporal envelope smearing settings for the filterbank back end."""

    cutoff_hz: float = 16.0
    method: str = "hilbert"      # or "rectify"
    fir_cycles: float = 4.0      # lowpass order = fir_cycles * fs / cutoff

    def __post_init__(self):
        if self.cutoff_hz <= 0:
            raise ValueError("cutoff must be positive")
        if self.method not in ("hilbert", "rectify"):
            raise ValueError("envelope method must be 'hilbert' or 'rectify'")


def sqrt_hann(n: int) -> np.ndarray:
    """Square-root of the periodic hanning window; squares sum to 1 at 50% hop."""
    k = np.arange(n)
    return np.sqrt(0.5 - 0.5 * np.cos(2.0 * np.pi * k / n))


def loss_to_spectrum(loss_col: np.ndarray, table: ChannelTable, fs: float,
                     n_bins: int) -> MagnitudeSpectrum:
    """Map per-channel loss (dB) on the ERB-rate axis to linear-frequency gains.

    The negative loss is interpolated along ERB-rate, sampled at each linear
    frequency bin through the warp, held constant outside the channel range,
    and converted to linear amplitude.
    """
    grid = np.linspace(0.0, fs / 2.0, n_bins)
    rates = hz_to_erb_rate(grid)
    channel_rates = hz_to_erb_rate(table.fp1)
    db = np.interp(rates, channel_rates, -np.asarray(loss_col, dtype=float))
    return MagnitudeSpectrum(grid, 10.0 ** (db / 20.0))


def _loss_columns_for_frame(loss: LossField, t_start: float, t_end: float) -> np.ndarray:
    times = loss.times
    inside = (times >= t_start) & (times < t_end)
    if not np.any(inside):
        nearest = int(np.argmin(np.abs(times - 0.5 * (t_start + t_end))))
        return loss.l_total[:, nearest]
    return loss.l_total[:, inside].mean(axis=1)


def synth_dtvf(signal_samples: np.ndarray, loss: LossField, table: ChannelTable,
               cfg: DtvfConfig = DtvfConfig()) -> np.ndarray:
    """Direct time-varying filtering: window, filter, re-window, overlap-add.

    Each frame's loss column average becomes a minimum-phase kernel; with
    zero loss the kernels are impulses and the output equals the input.
    """
    fs = table.config.fs
    x = np.asarray(signal_samples, dtype=float)
    n = len(x)
    if n == 0:
        return np.zeros(0)
    duration = n / fs
    if loss.n_frames and loss.times[-1] + loss.frame_shift < duration - loss.frame_shift:
        raise ValueError("loss field does not cover the signal duration")

    frame = int(round(cfg.frame_len * fs))
    frame -= frame % 2
    hop = frame // 2
    window = sqrt_hann(frame)
    kern_len = cfg.kernel_len if cfg.kernel_len is not None else frame

    padded = np.concatenate([np.zeros(hop), x, np.zeros(frame)])
    n_frames = 1 + (len(padded) - frame) // hop
    out = np.zeros(len(padded))

    kernel_cache: dict = {}
    for f in range(n_frames):
        start = f * hop
        t0 = (start - hop) / fs
        col = _loss_columns_for_frame(loss, t0, t0 + frame / fs)
        key = np.round(col, 4).tobytes()
        kern = kernel_cache.get(key)
        if kern is None:
            spectrum = loss_to_spectrum(col, table, fs, cfg.n_bins)
            kern = design_minphase(spectrum, kern_len)
            kernel_cache[key] = kern
        segment = padded[start:start + frame] * window
        filtered = oaconvolve(segment, kern.taps)[:frame]
        out[start:start + frame] += filtered * window
    return out[hop:hop + n]


def synth_fbas(channels: np.ndarray, table: ChannelTable) -> np.ndarray:
    """Sum delay-compensated channel signals into one waveform.

    Each channel is advanced by a constant number of cycles of its peak
    frequency and scaled by its calibrated resynthesis gain (both measured
    once per filterbank from the normal-hearing chain response).
    """
    kappa, weights = table.fbas_calibration()
    fs = table.config.fs
    n = channels.shape[1]
    out = np.zeros(n)
    for k in range(channels.shape[0]):
        d = int(round(kappa * fs / table.channels[k].fp1))
        seg = channels[k, d:]
        out[: len(seg)] += weights[k] * seg
    return out


def temporal_smear(channel: np.ndarray, cfg: SmearConfig, fs: float) -> np.ndarray:
    """Reduce temporal modulation by lowpassing the channel envelope.

    The carrier is recovered by dividing out the envelope with a small
    regularizer, then remodulated with the lowpassed envelope.  A silent
    channel is returned unchanged.
    """
    x = np.asarray(channel, dtype=float)
    if x.size == 0 or not np.any(x):
        return x.copy()
    if cfg.cutoff_hz >= fs / 2.0:
        raise ValueError("smear cutoff must lie below Nyquist")

    if cfg.method == "hilbert":
        env = np.abs(hilbert(x))
    else:
        # Half-wave rectification leaves the envelope at 1/pi of the amplitude
        # once the carrier is smoothed away; the extraction cutoff adapts to
        # the estimated carrier frequency.
        crossings = np.count_nonzero(np.diff(np.signbit(x)))
        carrier_hz = max(crossings / (2.0 * len(x) / fs), 2.0 * cfg.cutoff_hz)
        extract = np.clip(carrier_hz / 2.5, 2.0 * cfg.cutoff_hz, 0.4 * fs)
        env = np.pi * _linear_phase_lowpass(np.maximum(x, 0.0), extract, fs, cycles=8.0)
        env = np.maximum(env, 0.0)

    env_lp = np.maximum(_linear_phase_lowpass(env, cfg.cutoff_hz, fs, cfg.fir_cycles), 0.0)
    eps = 1e-6 * float(np.max(env))
    carrier = x / (env + eps)
    return carrier * env_lp


def _linear_phase_lowpass(x: np.ndarray, cutoff_hz: float, fs: float,
                          cycles: float) -> np.ndarray:
    order = int(round(cycles * fs / cutoff_hz))
    order += order % 2   # even order, integer group delay
    taps = firwin(order + 1, cutoff_hz, fs=fs)
    # edge padding suppresses the filter's startup transient, which would
    # otherwise swallow order/2 samples at each end
    pad = order // 2
    padded = np.concatenate([np.full(pad, x[0]), x, np.full(pad, x[-1])])
    return oaconvolve(padded, taps)[order:order + len(x)]
