"""Frequency <-> ERB-rate conversions and ERB bandwidths.

The equivalent rectangular bandwidth (ERB) of the normal-hearing auditory
filter and its cumulative frequency scale (ERB-rate, unit Cam) follow the
standard Glasberg & Moore formulation.  Every filter shape and the channel
axis of the filterbank are built on these conversions.
"""

from __future__ import annotations

import numpy as np

_EAR_Q_SLOPE = 4.37e-3   # per Hz
_MIN_BW = 24.7           # Hz
_CAM_SCALE = 21.4


def _check_nonnegative(value, name: str) -> None:
    if np.any(np.asarray(value) < 0):
        raise ValueError(f"{name} must be >= 0")


def erb_bandwidth(freq_hz):
    """ERB in Hz of the average normal-hearing auditory filter at ``freq_hz``.

    Accepts scalars or arrays; strictly increasing in frequency.
    """
    _check_nonnegative(freq_hz, "freq_hz")
    f = np.asarray(freq_hz, dtype=float)
    out = _MIN_BW * (_EAR_Q_SLOPE * f + 1.0)
    return out if out.ndim else float(out)


def hz_to_erb_rate(freq_hz):
    """Convert frequency in Hz to ERB-rate (Cam)."""
    _check_nonnegative(freq_hz, "freq_hz")
    f = np.asarray(freq_hz, dtype=float)
    out = _CAM_SCALE * np.log10(_EAR_Q_SLOPE * f + 1.0)
    return out if out.ndim else float(out)


def erb_rate_to_hz(erb_rate):
    """Analytic inverse of :func:`hz_to_erb_rate`."""
    _check_nonnegative(erb_rate, "erb_rate")
    e = np.asarray(erb_rate, dtype=float)
    out = (10.0 ** (e / _CAM_SCALE) - 1.0) / _EAR_Q_SLOPE
    return out if out.ndim else float(out)


def erb_rate_derivative(freq_hz):
    """d(ERB-rate)/df in Cam per Hz, used for sanity checks of the warp."""
    _check_nonnegative(freq_hz, "freq_hz")
    f = np.asarray(freq_hz, dtype=float)
    out = (_CAM_SCALE / np.log(10.0)) * _EAR_Q_SLOPE / (_EAR_Q_SLOPE * f + 1.0)
    return out if out.ndim else float(out)
