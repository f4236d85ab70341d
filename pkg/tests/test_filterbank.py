import io

import numpy as np
import pytest

from hisim import GcfbConfig, analyze, build_filterbank, make_tone
from hisim.erbscale import hz_to_erb_rate
from hisim.filterbank import ConfigError, active_gain, estimate_level, total_gain
from hisim.hearing import HearingSpec

from .conftest import FS, calibrated


def test_config_validation():
    with pytest.raises(ConfigError):
        GcfbConfig(fs=FS, n_ch=1)
    with pytest.raises(ConfigError):
        GcfbConfig(fs=FS, f_hi=0.5 * FS)   # above 0.45 * fs
    with pytest.raises(ConfigError):
        GcfbConfig(fs=FS, f_lo=9000.0)
    assert GcfbConfig(fs=16000).f_hi_effective == pytest.approx(7200.0)


def test_two_channel_endpoints():
    table = build_filterbank(GcfbConfig(fs=FS, n_ch=2))
    assert table.fp1[0] == pytest.approx(100.0, rel=0.01)
    assert table.fp1[1] == pytest.approx(8000.0, rel=0.01)


def test_channels_equally_spaced_in_erb_rate(table100):
    rates = hz_to_erb_rate(table100.fp1)
    steps = np.diff(rates)
    assert np.max(np.abs(steps - steps.mean())) < 0.01


def test_peak_frequencies_strictly_increasing(table100):
    assert np.all(np.diff(table100.fp1) > 0)


def test_level_estimate_matches_tone_spl(table100):
    k = 60
    tone = make_tone(table100.fp1[k], 0.15, FS, 60.0)
    pc = estimate_level(tone.samples, table100, tone.spl_ref)
    mid = pc.shape[1] // 2
    assert pc[k, mid] == pytest.approx(60.0, abs=2.0)


def test_level_estimate_linearity(table100):
    k = 40
    t1 = make_tone(table100.fp1[k], 0.12, FS, 55.0)
    t2 = make_tone(table100.fp1[k], 0.12, FS, 65.0)
    pc1 = estimate_level(t1.samples, table100, t1.spl_ref)
    pc2 = estimate_level(t2.samples, table100, t2.spl_ref)
    mid = pc1.shape[1] // 2
    assert pc2[k, mid] - pc1[k, mid] == pytest.approx(10.0, abs=0.1)


def test_level_estimate_silence_floor(table100):
    pc = estimate_level(np.zeros(FS // 50), table100, 94.0)
    assert np.all(pc <= table100.config.floor_db + 3.0)


def test_active_gain_zero_at_reference(table100):
    m = table100.io_models[50]
    assert active_gain(m.p_gain0, 1.0, m) == pytest.approx(0.0, abs=1e-9)
    assert active_gain(35.0, 0.0, m) == 0.0


def test_active_gain_compressive_slope_at_2khz(table100):
    k = int(np.argmin(np.abs(table100.fp1 - 2000.0)))
    m = table100.io_models[k]
    p = np.arange(30.0, 80.0, 0.5)
    out = active_gain(p, 1.0, m) + p
    slopes = np.gradient(out, p)
    assert 0.4 <= slopes.mean() <= 0.7
    assert np.all(slopes < 1.0)


def test_total_gain(table100):
    m = table100.io_models[30]
    p = np.array([20.0, 60.0, 90.0])
    np.testing.assert_allclose(total_gain(p, 1.0, 0.0, m), active_gain(p, 1.0, m))
    np.testing.assert_allclose(total_gain(p, 0.0, 30.0, m), -30.0)
    assert total_gain(100.0, 1.0, 0.0, m) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        total_gain(50.0, 1.0, -1.0, m)


def test_analyze_requires_calibration(table100):
    with pytest.raises(ValueError, match="calibrated"):
        analyze(np.zeros(100), table100)


def test_analyze_nh_threshold_tone(table100):
    k = int(np.argmin(np.abs(table100.fp1 - 1000.0)))
    level = table100.io_models[k].p_at
    tone = make_tone(table100.fp1[k], 0.2, FS, level)
    ep = analyze(tone, table100)
    assert abs(float(ep.levels.max())) <= 5.0


def test_analyze_compressive_growth(table100):
    k = int(np.argmin(np.abs(table100.fp1 - 2000.0)))
    f = table100.fp1[k]
    lo = analyze(make_tone(f, 0.15, FS, 50.0), table100).levels.max()
    hi = analyze(make_tone(f, 0.15, FS, 60.0), table100).levels.max()
    assert 0.0 < hi - lo < 10.0


def test_analyze_silence_is_floor(table100):
    ep = analyze(calibrated(np.zeros(FS // 50)), table100)
    assert np.all(ep.levels == table100.config.floor_db)


def test_analyze_monotone_in_level(table100):
    k = int(np.argmin(np.abs(table100.fp1 - 1000.0)))
    f = table100.fp1[k]
    outs = [analyze(make_tone(f, 0.12, FS, spl), table100).levels.max()
            for spl in (-10.0, 20.0, 50.0, 80.0, 100.0)]
    assert all(a < b for a, b in zip(outs, outs[1:]))


def test_analyze_shift_invariant_to_leading_silence(table100):
    rng = np.random.default_rng(5)
    x = rng.standard_normal(FS // 10) * 0.02
    shift_samples = 24 * 20   # exactly 20 frame shifts at 0.5 ms
    ep0 = analyze(calibrated(x), table100)
    ep1 = analyze(calibrated(np.concatenate([np.zeros(shift_samples), x])), table100)
    a = ep0.levels[:, 40:120]
    b = ep1.levels[:, 60:140]
    assert np.max(np.abs(a - b)) < 0.5


def test_analyze_passive_loss_is_vertical_shift(table100):
    fp1 = table100.fp1
    l_pas = 25.0
    shifted = HearingSpec(fp1=fp1, hl_total=np.full_like(fp1, l_pas),
                          alpha_requested=np.ones_like(fp1), alpha=np.ones_like(fp1),
                          hl_act=np.zeros_like(fp1), hl_pas=np.full_like(fp1, l_pas),
                          l_pas=np.full_like(fp1, l_pas))
    tone = make_tone(1000.0, 0.12, FS, 70.0)
    ep_nh = analyze(tone, table100)
    ep_hi = analyze(tone, table100, shifted)
    sel = ep_nh.levels > -60.0
    np.testing.assert_allclose(ep_hi.levels[sel], ep_nh.levels[sel] - l_pas, atol=0.1)


def test_concurrent_analysis_matches_sequential(table100):
    from dataclasses import replace
    cfg = replace(table100.config, workers=3)
    parallel = build_filterbank(cfg, table100.params, table100.threshold)
    tone = make_tone(1500.0, 0.1, FS, 60.0)
    ep_seq = analyze(tone, table100)
    ep_par = analyze(tone, parallel)
    np.testing.assert_array_equal(ep_seq.levels, ep_par.levels)


def test_analyze_ten_seconds_within_time_budget(table100):
    import time
    rng = np.random.default_rng(8)
    x = rng.standard_normal(10 * FS) * 0.03
    start = time.time()
    analyze(calibrated(x), table100)
    assert time.time() - start <= 20.0


def test_excitation_csv_export(table100):
    tone = make_tone(1000.0, 0.05, FS, 60.0)
    ep = analyze(tone, table100)
    text = ep.to_csv()
    lines = text.strip().splitlines()
    assert len(lines) == ep.n_ch + 1
    header = lines[0].split(",")
    assert header[0] == "fp1_hz"
    assert len(header) == ep.n_frames + 1
    first = lines[1].split(",")
    assert float(first[0]) == pytest.approx(table100.fp1[0], abs=0.01)
