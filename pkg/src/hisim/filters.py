"""Gammachirp filter magnitudes and realizable minimum-phase FIR kernels.

The compressive auditory filter is modeled as a passive gammachirp (a
gammatone carrier with a frequency glide) cascaded with a high-pass
asymmetric function (HP-AF) whose dynamic range scales with the compression
health ``alpha``.  Both stages are defined here as analytic magnitude
responses; realizable filters are minimum-phase FIR kernels designed from
those magnitudes with the real-cepstrum method.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.signal import oaconvolve

from .erbscale import erb_bandwidth

MAG_FLOOR_DB = -100.0  # relative to peak, guards the log in the cepstral design


@dataclass(frozen=True)
class GcParams:
    """Gammachirp parameter set.

    The bandwidth and chirp coefficients come from notched-noise estimates
    for normal-hearing listeners; ``c2_nh`` is scaled by the compression
    health before building hearing-impaired filters.  ``order`` is the
    gammatone order; 5 reproduces the expected cascade-vs-passive bandwidth
    ratios with the minimum-phase realization used here.
    """

    b1: float = 1.81
    c1: float = -2.96
    b2: float = 2.17
    c2_nh: float = 2.20
    frat0: float = 0.466
    frat1: float = 0.0109
    order: int = 5
    a_gamma: float = 1.0

    def __post_init__(self):
        if self.b1 <= 0 or self.b2 <= 0:
            raise ValueError("bandwidth factors b1, b2 must be positive")
        if self.order < 1:
            raise ValueError("gammatone order must be >= 1")


@dataclass
class MagnitudeSpectrum:
    """Linear-amplitude gains on a uniform frequency grid from DC to Nyquist."""

    grid: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.gains = np.asarray(self.gains, dtype=float)
        if self.grid.shape != self.gains.shape:
            raise ValueError("grid and gains must have the same shape")
        if not np.all(np.isfinite(self.gains)) or np.any(self.gains < 0):
            raise ValueError("gains must be finite and >= 0")


@dataclass
class MinPhaseKernel:
    """Causal FIR taps whose magnitude response approximates a target spectrum."""

    taps: np.ndarray

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=float)

    def __len__(self) -> int:
        return len(self.taps)

    def magnitude(self, freqs_hz, fs: float) -> np.ndarray:
        """Evaluate |H(f)| of the kernel at the given frequencies."""
        freqs_hz = np.atleast_1d(np.asarray(freqs_hz, dtype=float))
        n_fft = max(4 * len(self.taps), 1024)
        spec = np.abs(np.fft.rfft(self.taps, n_fft))
        grid = np.fft.rfftfreq(n_fft, 1.0 / fs)
        return np.interp(freqs_hz, grid, spec)


def frat(level_db) -> float | np.ndarray:
    """Level-dependent ratio between the HP-AF center and the passive peak."""
    p = GcParams()
    out = p.frat0 + p.frat1 * np.asarray(level_db, dtype=float)
    return out if out.ndim else float(out)


def gammatone_mag(f, fr1: float, params: GcParams = GcParams()):
    """Gammatone magnitude, peak 1 at ``fr1``."""
    if fr1 <= 0:
        raise ValueError("fr1 must be positive")
    u = (np.asarray(f, dtype=float) - fr1) / (params.b1 * erb_bandwidth(fr1))
    out = (1.0 + u * u) ** (-params.order / 2.0)
    return out if out.ndim else float(out)


def pgc_mag(f, fr1: float, params: GcParams = GcParams()):
    """Passive gammachirp magnitude: gammatone times the chirp term."""
    if fr1 <= 0:
        raise ValueError("fr1 must be positive")
    f = np.asarray(f, dtype=float)
    u = (f - fr1) / (params.b1 * erb_bandwidth(fr1))
    gt = (1.0 + u * u) ** (-params.order / 2.0)
    out = params.a_gamma * gt * np.exp(params.c1 * np.arctan(u))
    return out if out.ndim else float(out)


def hpaf_mag(f, fr2: float, c2_eff: float, params: GcParams = GcParams(),
             grid_max_hz: float | None = None):
    """High-pass asymmetric function, normalized to unit peak gain.

    ``c2_eff`` is the health-scaled chirp coefficient (alpha * c2_nh).  The
    normalization maximum is taken over the evaluation grid; pass
    ``grid_max_hz`` to normalize against a wider grid than the points being
    evaluated (the analyzer uses the design-grid Nyquist).
    """
    if fr2 <= 0:
        raise ValueError("fr2 must be positive")
    f = np.asarray(f, dtype=float)
    theta = np.arctan((f - fr2) / (params.b2 * erb_bandwidth(fr2)))
    raw = np.exp(c2_eff * theta)
    if grid_max_hz is not None:
        ref_theta = np.arctan((grid_max_hz - fr2) / (params.b2 * erb_bandwidth(fr2)))
        peak = max(np.exp(c2_eff * ref_theta), float(np.max(raw)))
    else:
        peak = float(np.max(raw))
    out = raw / peak
    return out if out.ndim else float(out)


def pgc_peak_frequency(fr1: float, params: GcParams = GcParams()) -> float:
    """Peak frequency of the passive gammachirp, found by numeric search.

    For a negative chirp coefficient the peak sits below ``fr1``.
    """
    if fr1 <= 0:
        raise ValueError("fr1 must be positive")
    if params.c1 == 0:
        return fr1
    if params.c1 < 0:
        lo, hi = fr1 * 0.05, fr1
    else:
        lo, hi = fr1, fr1 * 8.0
    res = minimize_scalar(lambda f: -pgc_mag(f, fr1, params), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-7 * fr1})
    return float(res.x)


def fr1_for_peak(fp1: float, params: GcParams = GcParams()) -> float:
    """Invert :func:`pgc_peak_frequency`: asymptotic frequency for a target peak."""
    if fp1 <= 0:
        raise ValueError("fp1 must be positive")
    if params.c1 == 0:
        return fp1
    if params.c1 < 0:
        lo, hi = fp1, fp1 * 8.0
    else:
        lo, hi = fp1 * 0.125, fp1
    return float(brentq(lambda fr1: pgc_peak_frequency(fr1, params) - fp1,
                        lo, hi, xtol=1e-6 * fp1))


def cascade_mag(f, fr1: float, alpha: float, params: GcParams = GcParams(),
                grid_max_hz: float | None = None, fp1: float | None = None):
    """Magnitude of the passive gammachirp cascaded with the HP-AF.

    The HP-AF center frequency is tied to the passive peak through the
    level ratio evaluated at 50 dB.  ``fp1`` may be passed to skip the peak
    search when it is already cached.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be within [0, 1]")
    if fp1 is None:
        fp1 = pgc_peak_frequency(fr1, params)
    fr2 = frat(50.0) * fp1
    return pgc_mag(f, fr1, params) * hpaf_mag(f, fr2, alpha * params.c2_nh, params,
                                              grid_max_hz=grid_max_hz)


def design_grid(fs: float, n_bins: int = 8193) -> np.ndarray:
    """Uniform rfft-style frequency grid from DC to Nyquist."""
    return np.linspace(0.0, fs / 2.0, n_bins)


def design_minphase(mag: MagnitudeSpectrum, length: int) -> MinPhaseKernel:
    """Design a minimum-phase FIR kernel from a magnitude spectrum.

    Real-cepstrum method: floor the magnitude, take the log spectrum, fold
    the cepstrum onto causal quefrencies and exponentiate back.  The result
    is causal with no pre-ring and matches the (floored) magnitude within
    the truncation error of ``length`` taps.
    """
    if length < 32:
        raise ValueError("kernel length must be >= 32")
    gains = mag.gains
    peak = float(np.max(gains))
    if peak <= 0.0:
        raise ValueError("cannot design a kernel from an all-zero spectrum")
    floor = peak * 10.0 ** (MAG_FLOOR_DB / 20.0)
    gains = np.maximum(gains, floor)

    n_bins = len(gains)
    n_fft = 2 * (n_bins - 1)
    log_mag = np.log(gains)
    cepstrum = np.fft.irfft(log_mag, n_fft)

    folded = np.zeros(n_fft)
    folded[0] = cepstrum[0]
    folded[1:n_fft // 2] = 2.0 * cepstrum[1:n_fft // 2]
    folded[n_fft // 2] = cepstrum[n_fft // 2]
    min_phase_spec = np.exp(np.fft.rfft(folded))
    taps = np.fft.irfft(min_phase_spec, n_fft)

    length = min(length, n_fft)
    return MinPhaseKernel(taps[:length].copy())


def apply_fir(signal: np.ndarray, kernel: MinPhaseKernel) -> np.ndarray:
    """Linear convolution truncated to the input length (no latency shift)."""
    x = np.asarray(signal, dtype=float)
    if x.size == 0:
        return np.zeros(0)
    return oaconvolve(x, kernel.taps)[: len(x)]
