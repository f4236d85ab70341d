import numpy as np
import pytest
from scipy.io import wavfile

from hisim.audio_io import (AudioIoError, CalibratedSignal, load_wav, save_wav,
                            set_leq)

FS = 48000


def test_float32_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    samples = rng.standard_normal(5000).astype(np.float32).astype(np.float64)
    path = tmp_path / "x.wav"
    save_wav(CalibratedSignal(samples, FS), path)
    loaded = load_wav(path)
    np.testing.assert_array_equal(loaded.samples, samples)
    assert loaded.fs == FS


def test_int16_round_trip_within_one_lsb(tmp_path):
    rng = np.random.default_rng(1)
    samples = np.clip(rng.standard_normal(4000) * 0.3, -1, 1)
    path = tmp_path / "x16.wav"
    save_wav(CalibratedSignal(samples, FS), path, dtype="int16")
    loaded = load_wav(path)
    assert np.max(np.abs(loaded.samples - samples)) <= 1.0 / 32768.0


def test_stereo_downmix_warns(tmp_path):
    path = tmp_path / "st.wav"
    left = np.linspace(-0.5, 0.5, 1000).astype(np.float32)
    right = np.zeros(1000, dtype=np.float32)
    wavfile.write(path, FS, np.stack([left, right], axis=1))
    with pytest.warns(UserWarning, match="stereo"):
        sig = load_wav(path)
    np.testing.assert_allclose(sig.samples, (left + right) / 2.0, atol=1e-7)


def test_unsupported_rate_rejected(tmp_path):
    path = tmp_path / "slow.wav"
    wavfile.write(path, 8000, np.zeros(100, dtype=np.float32))
    with pytest.raises(AudioIoError, match="sampling rate"):
        load_wav(path)


def test_malformed_file_rejected(tmp_path):
    path = tmp_path / "bad.wav"
    path.write_bytes(b"RIFFgarbage")
    with pytest.raises(AudioIoError, match="cannot read"):
        load_wav(path)


def test_set_leq_hits_target():
    rng = np.random.default_rng(2)
    sig = CalibratedSignal(rng.standard_normal(FS // 10), FS)
    out = set_leq(sig, 50.0)
    assert out.leq_spl() == pytest.approx(50.0, abs=0.01)


def test_set_leq_idempotent():
    rng = np.random.default_rng(3)
    sig = CalibratedSignal(rng.standard_normal(FS // 10), FS)
    once = set_leq(sig, 60.0)
    twice = set_leq(once, 60.0)
    np.testing.assert_allclose(twice.samples, once.samples, rtol=1e-12)


def test_set_leq_gain_is_exact_power_step():
    rng = np.random.default_rng(4)
    sig = CalibratedSignal(rng.standard_normal(FS // 20), FS)
    lo = set_leq(sig, 40.0)
    hi = set_leq(sig, 70.0)
    np.testing.assert_allclose(hi.samples, lo.samples * 10 ** 1.5, rtol=1e-12)


def test_set_leq_rejects_silence():
    with pytest.raises(AudioIoError):
        set_leq(CalibratedSignal(np.zeros(100), FS), 50.0)


def test_signal_validation():
    with pytest.raises(AudioIoError):
        CalibratedSignal(np.zeros((2, 10)), FS)
    with pytest.raises(AudioIoError):
        CalibratedSignal(np.array([np.nan]), FS)
    with pytest.raises(AudioIoError):
        CalibratedSignal(np.zeros(10), 12345)
