"""Frame-based gammachirp filterbank: channel layout, level estimation,
level-dependent gain, and excitation-pattern analysis.

Each channel is a fixed minimum-phase cascade (passive gammachirp + HP-AF)
whose shape depends on the listener's compression health.  Level dependence
is applied per frame: the signal level estimated from two linear paths
drives an active gain, a constant passive loss is subtracted, and the result
is referenced so 0 dB corresponds to the normal-hearing absolute threshold.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .erbscale import erb_rate_to_hz, hz_to_erb_rate
from .filters import (GcParams, MagnitudeSpectrum, MinPhaseKernel, apply_fir,
                      cascade_mag, design_grid, design_minphase, fr1_for_peak,
                      frat, pgc_mag, pgc_peak_frequency)
from .framing import DB_FLOOR, FrameSeries, frame_rms, rms_to_db
from .hearing import ChannelIoModel, HearingSpec, ThresholdReference

DEFAULT_KERNEL_LEN_48K = 4096


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GcfbConfig:
    """Filterbank layout and level-estimation settings.

    ``f_hi`` left unset defaults to 8 kHz clipped to 0.45 * fs; an explicit
    value above that limit is rejected.  ``w1``/``w2``/``p_exp`` control the
    weighted power-mean combination of the two level-estimation sources.
    """

    fs: float = 48000.0
    n_ch: int = 100
    f_lo: float = 100.0
    f_hi: float | None = None
    p_gain0: float = 100.0
    w1: float = 0.5
    w2: float = 0.5
    p_exp: float = 1.0
    frame_len: float = 0.001
    frame_shift: float = 0.0005
    kernel_len: int | None = None
    n_bins: int = 8193
    floor_db: float = DB_FLOOR
    workers: int = 0

    def __post_init__(self):
        if self.n_ch < 2:
            raise ConfigError("n_ch must be >= 2")
        if self.fs < 8000:
            raise ConfigError("fs must be >= 8000 Hz")
        limit = 0.45 * self.fs
        if self.f_hi is not None and self.f_hi > limit:
            raise ConfigError(f"f_hi={self.f_hi} exceeds 0.45*fs={limit:.0f}")
        if self.f_lo <= 0 or self.f_lo >= (self.f_hi or min(8000.0, limit)):
            raise ConfigError("need 0 < f_lo < f_hi")
        if self.w1 < 0 or self.w2 < 0 or self.w1 + self.w2 <= 0:
            raise ConfigError("level weights must be nonnegative and not both zero")
        if self.p_exp <= 0:
            raise ConfigError("power-mean exponent must be positive")

    @property
    def f_hi_effective(self) -> float:
        return self.f_hi if self.f_hi is not None else min(8000.0, 0.45 * self.fs)

    @property
    def kernel_len_effective(self) -> int:
        if self.kernel_len is not None:
            return self.kernel_len
        return max(256, int(round(DEFAULT_KERNEL_LEN_48K * self.fs / 48000.0)))


@dataclass
class Channel:
    index: int
    fr1: float
    fp1: float
    fr2: float
    erb_rate: float


@dataclass
class ExcitationPattern:
    """Channel x frame matrix of output levels in dB re the threshold reference."""

    levels: np.ndarray
    fp1: np.ndarray
    frame_shift: float
    frame_len: float
    t0: float = 0.0
    floor_db: float = DB_FLOOR

    @property
    def n_ch(self) -> int:
        return self.levels.shape[0]

    @property
    def n_frames(self) -> int:
        return self.levels.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_frames) * self.frame_shift

    def linear_amplitude(self) -> np.ndarray:
        return 10.0 ** (self.levels / 20.0)

    def to_csv(self, fileobj=None) -> str | None:
        """Textual matrix: header row of frame times, one row per channel led by fp1."""
        own = fileobj is None
        buf = io.StringIO() if own else fileobj
        writer = csv.writer(buf)
        writer.writerow(["fp1_hz"] + [f"{t:.6f}" for t in self.times])
        for k in range(self.n_ch):
            writer.writerow([f"{self.fp1[k]:.3f}"] + [f"{v:.3f}" for v in self.levels[k]])
        if own:
            return buf.getvalue()
        return None


class ChannelTable:
    """Immutable channel layout plus lazily designed minimum-phase kernels."""

    def __init__(self, config: GcfbConfig, params: GcParams,
                 threshold: ThresholdReference):
        self.config = config
        self.params = params
        self.threshold = threshold
        self.grid = design_grid(config.fs, config.n_bins)

        e_lo = hz_to_erb_rate(config.f_lo)
        e_hi = hz_to_erb_rate(config.f_hi_effective)
        targets = erb_rate_to_hz(np.linspace(e_lo, e_hi, config.n_ch))
        self.channels: list[Channel] = []
        for i, fp in enumerate(targets):
            fr1 = fr1_for_peak(float(fp), params)
            fp1 = pgc_peak_frequency(fr1, params)
            self.channels.append(Channel(index=i, fr1=fr1, fp1=fp1,
                                         fr2=frat(50.0) * fp1,
                                         erb_rate=float(hz_to_erb_rate(fp1))))
        self.fp1 = np.array([c.fp1 for c in self.channels])
        if np.any(np.diff(self.fp1) <= 0):
            raise ConfigError("channel peak frequencies are not strictly increasing")

        # One-ERB-higher neighbor used as the second level-estimation source.
        rates = np.array([c.erb_rate for c in self.channels])
        self.level_neighbor = np.array(
            [int(np.argmin(np.abs(rates - (r + 1.0)))) for r in rates])

        self.io_models = [ChannelIoModel(c.fp1, threshold.level(c.fp1),
                                         params, config.p_gain0)
                          for c in self.channels]
        self._kernels: dict = {}
        self._mag_cache: dict = {}
        self._fbas: tuple | None = None  # (kappa, click_peak)

    @property
    def n_ch(self) -> int:
        return len(self.channels)

    # -- magnitude and kernel construction -------------------------------

    def cascade_magnitude(self, ch: int, alpha: float) -> np.ndarray:
        key = ("mag", ch, round(float(alpha), 9))
        if key not in self._mag_cache:
            c = self.channels[ch]
            self._mag_cache[key] = cascade_mag(
                self.grid, c.fr1, float(alpha), self.params,
                grid_max_hz=self.grid[-1], fp1=c.fp1)
        return self._mag_cache[key]

    def cascade_peak(self, ch: int, alpha: float) -> tuple[float, float]:
        """Frequency and raw gain of the composite cascade maximum.

        The composite peak sits slightly above the passive peak whenever the
        HP-AF is active; at alpha = 0 the two coincide.
        """
        key = ("peak", ch, round(float(alpha), 9))
        if key not in self._mag_cache:
            mag = self.cascade_magnitude(ch, alpha)
            i = int(np.argmax(mag))
            self._mag_cache[key] = (float(self.grid[i]), float(mag[i]))
        return self._mag_cache[key]

    def cascade_kernel(self, ch: int, alpha: float) -> MinPhaseKernel:
        """Signal-path kernel, normalized to unit gain at the composite peak."""
        key = ("cascade", ch, round(float(alpha), 9))
        if key not in self._kernels:
            peak_hz, peak_gain = self.cascade_peak(ch, alpha)
            mag = self.cascade_magnitude(ch, alpha)
            kern = design_minphase(MagnitudeSpectrum(self.grid, mag / peak_gain),
                                   self.config.kernel_len_effective)
            kern.taps /= kern.magnitude(peak_hz, self.config.fs)[0]
            self._kernels[key] = kern
        return self._kernels[key]

    def pgc_kernel(self, ch: int) -> MinPhaseKernel:
        """Level-path kernel for the passive stage, unit gain at its peak."""
        key = ("pgc", ch)
        if key not in self._kernels:
            c = self.channels[ch]
            mag = pgc_mag(self.grid, c.fr1, self.params)
            at_peak = float(np.interp(c.fp1, self.grid, mag))
            kern = design_minphase(MagnitudeSpectrum(self.grid, mag / at_peak),
                                   self.config.kernel_len_effective)
            kern.taps /= kern.magnitude(c.fp1, self.config.fs)[0]
            self._kernels[key] = kern
        return self._kernels[key]

    def level_offset(self, ch: int, alphas: np.ndarray) -> float:
        """Combination bias for a steady tone at the composite cascade peak.

        Subtracting this makes the estimated level equal the tone SPL.
        ``alphas`` are the per-channel health values of the current listener
        (they shape both cascades involved).
        """
        cfg = self.config
        c = self.channels[ch]
        peak_hz, _ = self.cascade_peak(ch, float(alphas[ch]))
        g1 = (pgc_mag(peak_hz, c.fr1, self.params)
              / pgc_mag(c.fp1, c.fr1, self.params))
        nb = int(self.level_neighbor[ch])
        mag_nb = self.cascade_magnitude(nb, float(alphas[nb]))
        _, peak_nb = self.cascade_peak(nb, float(alphas[nb]))
        g2 = float(np.interp(peak_hz, self.grid, mag_nb)) / peak_nb
        p = cfg.p_exp
        total = cfg.w1 + cfg.w2
        return (10.0 / p) * np.log10(
            (cfg.w1 * g1 ** (2.0 * p) + cfg.w2 * g2 ** (2.0 * p)) / total)

    # -- filterbank synthesis calibration --------------------------------

    def fbas_calibration(self, kappa_grid=None) -> tuple[float, np.ndarray]:
        """Delay constant and per-channel gains for filterbank resynthesis.

        Calibrated once per table from the normal-hearing chain: the delay
        constant minimizes the in-band ripple of the summed steady-state
        response, and smooth per-channel gains flatten the residual so a
        resynthesized sinusoid keeps its level.
        """
        if self._fbas is None:
            fs = self.config.fs
            if kappa_grid is None:
                kappa_grid = np.arange(0.0, 5.0 + 1e-9, 0.05)
            n_fft = 2 * self.config.kernel_len_effective
            freqs = np.fft.rfftfreq(n_fft, 1.0 / fs)
            omega = 2.0 * np.pi * freqs / fs
            spectra = np.array([np.fft.rfft(self.cascade_kernel(k, 1.0).taps, n_fft)
                                for k in range(self.n_ch)])
            band = (freqs >= 1.25 * self.config.f_lo) & (freqs <= 0.875 * self.config.f_hi_effective)

            best = (0.0, np.inf)
            for kappa in kappa_grid:
                d = np.round(kappa * fs / self.fp1)
                mag = np.abs((spectra * np.exp(1j * omega[None, :] * d[:, None])).sum(axis=0))
                ripple = mag[band].max() / mag[band].min()
                if ripple < best[1]:
                    best = (float(kappa), ripple)
            kappa = best[0]

            phased = spectra * np.exp(1j * omega[None, :]
                                      * np.round(kappa * fs / self.fp1)[:, None])
            weights = np.ones(self.n_ch)
            for _ in range(3):
                mag = np.abs((weights[:, None] * phased).sum(axis=0))
                gains = np.interp(self.fp1, freqs, mag)
                weights /= np.clip(gains / np.median(gains), 0.25, 4.0)
            mag = np.abs((weights[:, None] * phased).sum(axis=0))
            weights /= mag[band].mean()
            self._fbas = (kappa, weights)
        return self._fbas

    # -- bulk filtering ---------------------------------------------------

    def filter_channels(self, x: np.ndarray, alphas: np.ndarray) -> np.ndarray:
        """Cascade outputs for every channel, shape (n_ch, n_samples)."""
        out = np.empty((self.n_ch, len(x)))

        def work(k):
            out[k] = apply_fir(x, self.cascade_kernel(k, float(alphas[k])))

        self._run(work)
        return out

    def filter_pgc(self, x: np.ndarray) -> np.ndarray:
        out = np.empty((self.n_ch, len(x)))

        def work(k):
            out[k] = apply_fir(x, self.pgc_kernel(k))

        self._run(work)
        return out

    def _run(self, work) -> None:
        workers = self.config.workers
        if workers and workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(work, range(self.n_ch)))
        else:
            for k in range(self.n_ch):
                work(k)


def build_filterbank(config: GcfbConfig, params: GcParams = GcParams(),
                     threshold: ThresholdReference | None = None) -> ChannelTable:
    """Place channels equally spaced in ERB-rate and prepare their models."""
    return ChannelTable(config, params, threshold or ThresholdReference())


def active_gain(pc_db, alpha: float, io_model: ChannelIoModel):
    """Level-dependent gain in dB; 0 at the reference high level."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie within [0, 1]")
    return io_model.active_gain(pc_db, alpha)


def total_gain(pc_db, alpha: float, l_pas: float, io_model: ChannelIoModel):
    """Active gain minus the constant passive loss."""
    if l_pas < 0:
        raise ValueError("l_pas must be >= 0")
    return active_gain(pc_db, alpha, io_model) - l_pas


def _frame_matrix(outputs: np.ndarray, config: GcfbConfig, spl_ref: float) -> np.ndarray:
    rows = []
    for row in outputs:
        series = frame_rms(row, config.fs, config.frame_len, config.frame_shift)
        rows.append(rms_to_db(series.values, spl_ref, config.floor_db))
    return np.vstack(rows)


def estimate_level(signal_samples: np.ndarray, table: ChannelTable,
                   spl_ref: float, alphas: np.ndarray | None = None,
                   cascade_outputs: np.ndarray | None = None) -> np.ndarray:
    """Frame-based signal level per channel in dB SPL.

    Two sources per channel: the channel's passive-only path and the full
    cascade of the one-ERB-higher neighbor.  Their framed levels combine as
    a weighted power mean, and a per-channel bias is subtracted so a steady
    tone at the channel peak reads its own SPL.
    """
    cfg = table.config
    if alphas is None:
        alphas = np.ones(table.n_ch)
    if cascade_outputs is None:
        cascade_outputs = table.filter_channels(signal_samples, alphas)
    pgc_outputs = table.filter_pgc(signal_samples)

    l1 = _frame_matrix(pgc_outputs, cfg, spl_ref)
    l_cascade = _frame_matrix(cascade_outputs, cfg, spl_ref)

    p = cfg.p_exp
    total = cfg.w1 + cfg.w2
    pc = np.empty_like(l1)
    for k in range(table.n_ch):
        l2 = l_cascade[table.level_neighbor[k]]
        mix = (cfg.w1 * 10.0 ** (p * l1[k] / 10.0)
               + cfg.w2 * 10.0 ** (p * l2 / 10.0)) / total
        combined = (10.0 / p) * np.log10(mix)
        pc[k] = combined - table.level_offset(k, alphas)
        # silent frames stay at the floor instead of inheriting the offset
        pc[k][combined <= cfg.floor_db + 1e-9] = cfg.floor_db
    return np.maximum(pc, cfg.floor_db)


def analyze(signal, table: ChannelTable, hearing: HearingSpec | None = None,
            return_internals: bool = False):
    """Excitation pattern of a calibrated signal under a hearing condition.

    ``hearing`` of None means the normal-hearing setting.  The returned
    levels are dB re the channel's normal-hearing absolute threshold.
    """
    spl_ref = getattr(signal, "spl_ref", None)
    if spl_ref is None:
        raise ValueError("analyze requires a calibrated signal with an spl_ref")
    x = np.asarray(signal.samples, dtype=float)
    if getattr(signal, "fs", table.config.fs) != table.config.fs:
        raise ValueError("signal sampling rate does not match the filterbank")
    cfg = table.config

    if hearing is None:
        hearing = HearingSpec.normal(table.fp1)
    if hearing.n_ch != table.n_ch:
        raise ValueError("hearing spec does not match the channel count")

    cascade_outputs = table.filter_channels(x, hearing.alpha)
    pc = estimate_level(x, table, spl_ref, hearing.alpha, cascade_outputs)
    level_sig = _frame_matrix(cascade_outputs, cfg, spl_ref)

    ep = np.empty_like(level_sig)
    for k in range(table.n_ch):
        model = table.io_models[k]
        g = total_gain(pc[k], float(hearing.alpha[k]), float(hearing.l_pas[k]), model)
        ep[k] = level_sig[k] + g - model.k_const
    ep = np.maximum(ep, cfg.floor_db)

    pattern = ExcitationPattern(levels=ep, fp1=table.fp1.copy(),
                                frame_shift=cfg.frame_shift, frame_len=cfg.frame_len,
                                floor_db=cfg.floor_db)
    if return_internals:
        return pattern, {"pc": pc, "cascade_outputs": cascade_outputs}
    return pattern
