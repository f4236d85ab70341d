import json

import pytest

from hisim.config import AppConfig, load_config
from hisim.hearing import AudiogramError


def write(tmp_path, obj):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(obj))
    return path


def test_defaults_build_a_gcfb_config():
    cfg = AppConfig()
    gcfb = cfg.gcfb()
    assert gcfb.n_ch == 100
    assert gcfb.fs == 48000.0


def test_load_scalars_and_types(tmp_path):
    cfg = load_config(write(tmp_path, {"fs": 44100, "n_ch": 60, "workers": 2,
                                       "spl_ref": 90.0}))
    assert cfg.fs == 44100.0
    assert cfg.n_ch == 60 and isinstance(cfg.n_ch, int)
    assert cfg.workers == 2 and isinstance(cfg.workers, int)
    assert cfg.spl_ref == 90.0


def test_load_threshold_table(tmp_path):
    cfg = load_config(write(tmp_path, {
        "threshold_table": {"freqs_hz": [125, 1000, 8000], "spl_db": [28, 8, 14]}}))
    assert cfg.threshold.level(1000.0) == pytest.approx(8.0)


def test_load_gc_params(tmp_path):
    cfg = load_config(write(tmp_path, {"gc_params": {"order": 4}}))
    assert cfg.params.order == 4


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown config keys"):
        load_config(write(tmp_path, {"nch": 50}))


def test_bad_threshold_table_rejected(tmp_path):
    with pytest.raises(AudiogramError):
        load_config(write(tmp_path, {"threshold_table": {"freqs_hz": [1, 2]}}))


def test_invalid_json_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{nope")
    with pytest.raises(ValueError, match="invalid JSON"):
        load_config(path)
