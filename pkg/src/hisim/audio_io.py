"""WAV I/O and SPL calibration for the processing pipeline."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.io import wavfile

SUPPORTED_FS = (16000, 22050, 24000, 44100, 48000)
DEFAULT_SPL_REF = 94.0   # dB SPL corresponding to RMS 1.0 (1 Pa convention)


class AudioIoError(ValueError):
    pass


@dataclass
class CalibratedSignal:
    """Mono float samples with a digital-SPL calibration reference."""

    samples: np.ndarray
    fs: int
    spl_ref: float = DEFAULT_SPL_REF

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1:
            raise AudioIoError("calibrated signals are mono (1-D)")
        if not np.all(np.isfinite(self.samples)):
            raise AudioIoError("samples must be finite")
        if int(self.fs) not in SUPPORTED_FS:
            raise AudioIoError(
                f"unsupported sampling rate {self.fs}; expected one of {SUPPORTED_FS}")
        self.fs = int(self.fs)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.fs

    def rms(self) -> float:
        if self.samples.size == 0:
            return 0.0
        return float(np.sqrt(np.mean(self.samples ** 2)))

    def leq_spl(self) -> float:
        r = self.rms()
        if r <= 0.0:
            raise AudioIoError("signal is silent; level is undefined")
        return 20.0 * np.log10(r) + self.spl_ref

    def with_samples(self, samples: np.ndarray) -> "CalibratedSignal":
        return replace(self, samples=np.asarray(samples, dtype=float))


def load_wav(path, spl_ref: float = DEFAULT_SPL_REF) -> CalibratedSignal:
    """Read a PCM or float WAV file into a calibrated mono signal.

    Stereo content is downmixed to the channel mean with a warning.
    """
    try:
        fs, data = wavfile.read(path)
    except Exception as exc:
        raise AudioIoError(f"cannot read WAV file {path}: {exc}") from None

    if data.ndim == 2:
        warnings.warn(f"{path}: stereo input downmixed to mono (channel mean)")
        data = data.astype(np.float64).mean(axis=1)
        samples = pcm_to_float(data, data.dtype, already_float=True)
    else:
        samples = pcm_to_float(data, data.dtype)
    return CalibratedSignal(samples, fs, spl_ref)


def pcm_to_float(data: np.ndarray, dtype, already_float: bool = False) -> np.ndarray:
    """Scale integer PCM to [-1, 1] floats; float input passes through."""
    if already_float and np.issubdtype(dtype, np.floating):
        return np.asarray(data, dtype=np.float64)
    if np.issubdtype(dtype, np.floating):
        return data.astype(np.float64)
    if dtype == np.int16:
        return data.astype(np.float64) / 32768.0
    if dtype == np.int32:
        return data.astype(np.float64) / 2147483648.0
    if dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    raise AudioIoError(f"unsupported WAV sample format: {dtype}")


def save_wav(signal: CalibratedSignal, path, dtype: str = "float32") -> None:
    """Write the signal; float32 round trips bit-exactly through load_wav."""
    if dtype == "float32":
        wavfile.write(path, signal.fs, signal.samples.astype(np.float32))
    elif dtype == "int16":
        clipped = np.clip(signal.samples, -1.0, 32767.0 / 32768.0)
        wavfile.write(path, signal.fs, np.round(clipped * 32768.0).astype(np.int16))
    else:
        raise AudioIoError(f"unsupported output format: {dtype}")


def set_leq(signal: CalibratedSignal, target_spl: float) -> CalibratedSignal:
    """Scale the signal so its long-term level equals ``target_spl`` dB SPL."""
    rms = signal.rms()
    if rms <= 0.0:
        raise AudioIoError("cannot set the level of a silent signal")
    gain = 10.0 ** ((target_spl - signal.spl_ref) / 20.0) / rms
    return signal.with_samples(signal.samples * gain)
