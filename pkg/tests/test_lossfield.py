import numpy as np
import pytest

from hisim import analyze, make_tone
from hisim.filterbank import estimate_level
from hisim.framing import FrameSeries, resample_gain
from hisim.hearing import HearingSpec
from hisim.lossfield import attenuated_channels, compute_loss_field
from hisim.pipeline import resolve_listener

from .conftest import FS, calibrated


def passive_only_spec(table, l_pas_db):
    fp1 = table.fp1
    return HearingSpec(fp1=fp1, hl_total=np.full_like(fp1, l_pas_db),
                       alpha_requested=np.ones_like(fp1), alpha=np.ones_like(fp1),
                       hl_act=np.zeros_like(fp1),
                       hl_pas=np.full_like(fp1, l_pas_db),
                       l_pas=np.full_like(fp1, l_pas_db))


def test_normal_hearing_gives_zero_loss(table100):
    spec = HearingSpec.normal(table100.fp1)
    pc = np.full((table100.n_ch, 50), 55.0)
    loss = compute_loss_field(pc, spec, table100)
    np.testing.assert_allclose(loss.l_total, 0.0, atol=1e-9)


def test_passive_only_loss_is_constant(table100):
    spec = passive_only_spec(table100, 30.0)
    pc = np.full((table100.n_ch, 40), 60.0)
    loss = compute_loss_field(pc, spec, table100)
    np.testing.assert_allclose(loss.l_act, 0.0, atol=1e-9)
    np.testing.assert_allclose(loss.l_total, 30.0, atol=1e-9)


def test_active_loss_at_impaired_threshold_matches_split(table100, aud80):
    spec = resolve_listener(aud80, 0.5, table100)
    for k in (20, 50, 80):
        model = table100.io_models[k]
        t_alpha = model.threshold_input(float(spec.alpha[k]))
        pc = np.full((table100.n_ch, 3), -100.0)
        pc[k] = t_alpha
        loss = compute_loss_field(pc, spec, table100)
        assert loss.l_act[k, 0] == pytest.approx(spec.hl_act[k], abs=0.1)


def test_active_loss_growth_bounded(table100, aud80):
    spec = resolve_listener(aud80, 0.3, table100)
    levels = np.arange(-20.0, 111.0, 10.0)
    pc = np.tile(levels, (table100.n_ch, 1))
    loss = compute_loss_field(pc, spec, table100)
    growth = np.diff(loss.l_act, axis=1)
    assert np.max(growth) <= 10.0 + 1e-9


def test_active_loss_vanishes_at_reference_level(table100, aud80):
    spec = resolve_listener(aud80, 0.4, table100)
    pc = np.full((table100.n_ch, 2), table100.config.p_gain0)
    loss = compute_loss_field(pc, spec, table100)
    assert np.max(loss.l_act) <= 0.5


def test_channel_mismatch_rejected(table100, aud80):
    spec = resolve_listener(aud80, 0.5, table100)
    with pytest.raises(ValueError):
        compute_loss_field(np.zeros((3, 10)), spec, table100)


def test_attenuated_channels_zero_loss_identity(table100):
    spec = HearingSpec.normal(table100.fp1)
    rng = np.random.default_rng(2)
    x = rng.standard_normal(FS // 20) * 0.05
    pc = estimate_level(x, table100, 94.0, spec.alpha)
    loss = compute_loss_field(pc, spec, table100)
    outputs = table100.filter_channels(x, spec.alpha)
    attenuated = attenuated_channels(x, table100, spec, loss, outputs)
    np.testing.assert_allclose(attenuated, outputs, atol=1e-12)


def test_attenuated_channels_constant_loss(table100):
    spec = passive_only_spec(table100, 20.0)
    tone = make_tone(1000.0, 0.1, FS, 70.0)
    outputs = table100.filter_channels(tone.samples, spec.alpha)
    pc = estimate_level(tone.samples, table100, tone.spl_ref, spec.alpha, outputs)
    loss = compute_loss_field(pc, spec, table100)
    attenuated = attenuated_channels(tone.samples, table100, spec, loss, outputs)
    k = int(np.argmin(np.abs(table100.fp1 - 1000.0)))
    drop = 20 * np.log10(np.linalg.norm(outputs[k]) / np.linalg.norm(attenuated[k]))
    assert drop == pytest.approx(20.0, abs=0.2)


def test_loss_field_csv_export(table100, aud80):
    spec = resolve_listener(aud80, 0.5, table100)
    pc = np.full((table100.n_ch, 12), 60.0)
    loss = compute_loss_field(pc, spec, table100)
    lines = loss.to_csv().strip().splitlines()
    assert lines[0].startswith("fp1_hz")
    assert len(lines) == table100.n_ch + 1
    assert len(lines[1].split(",")) == loss.n_frames + 1


def test_attenuated_channels_follow_time_varying_ramp(table100):
    # a loss step must shape the output exactly like the resampled-gain oracle
    spec = HearingSpec.normal(table100.fp1)
    x = np.ones(int(40 * 0.0005 * FS))
    outputs = table100.filter_channels(x, spec.alpha)
    n_frames = 40
    l_total = np.zeros((table100.n_ch, n_frames))
    l_total[:, 20:] = 15.0
    from hisim.lossfield import LossField
    loss = LossField(l_total=l_total, l_act=l_total.copy(),
                     hl_pas=np.zeros(table100.n_ch), fp1=table100.fp1.copy(),
                     frame_shift=0.0005, frame_len=0.001)
    attenuated = attenuated_channels(x, table100, spec, loss, outputs)
    k = 50
    gains = resample_gain(FrameSeries(-l_total[k], 0.0005), FS, len(x))
    np.testing.assert_allclose(attenuated[k], outputs[k] * gains, atol=1e-12)
