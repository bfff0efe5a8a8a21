"""Tests for configuration loading."""

import math

import pytest

from duplexsim.config import DEFAULT_CONFIG_PATH, StageSpec, TransceiverConfig, load_config, print_config
from duplexsim.errors import ConfigError


def test_shipped_file_matches_dataclass_defaults(cfg):
    assert cfg == TransceiverConfig()


def test_default_values_are_shipped(cfg):
    assert cfg.antenna_separation_db == 40.0
    assert cfg.rf_cancellation_db == 30.0
    assert cfg.adc_bits == 12
    assert cfg.pa_memory_taps == (1.0, -0.05, 0.01)
    assert cfg.lna_iip3_dbm == -9.0
    assert cfg.si_k_factor_db == pytest.approx(35.8)
    assert cfg.sample_rate_hz == pytest.approx(64e6)


def test_env_var_selects_file(tmp_path, monkeypatch):
    path = tmp_path / "nosi.env"
    path.write_text("antenna_separation_db = inf\nadc_bits = 10\n", encoding="utf-8")
    monkeypatch.setenv("DUPLEXSIM_CONFIG", str(path))

    loaded = load_config()

    assert math.isinf(loaded.antenna_separation_db)
    assert not loaded.si_enabled
    assert loaded.adc_bits == 10
    assert loaded.rf_cancellation_db == 30.0


def test_explicit_path_wins_over_env(tmp_path, monkeypatch):
    monkeypatch.setenv("DUPLEXSIM_CONFIG", str(tmp_path / "missing.env"))
    assert load_config(DEFAULT_CONFIG_PATH).adc_bits == 12


@pytest.mark.parametrize("text", ["adc_bitz = 12\n", "adc_bits = twelve\n", "quantization = maybe\n"])
def test_bad_files_raise(tmp_path, text):
    path = tmp_path / "bad.env"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_file_raises(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.env")


def test_none_removes_intercept_point(tmp_path):
    path = tmp_path / "cfg.env"
    path.write_text("lna_iip2_dbm = none\n", encoding="utf-8")
    assert load_config(path).lna.iip2_dbm is None


def test_rx_linear_switch_strips_intercepts(cfg):
    stage = cfg.replace(rx_nonlinear=False).lna
    assert stage.iip2_dbm is None and stage.iip3_dbm is None
    assert stage.gain_db == 25.0


def test_stage_spec_rejects_negative_nf():
    with pytest.raises(ConfigError):
        StageSpec(10.0, -1.0)


def test_print_config_banner(cfg, capsys):
    print_config(cfg, DEFAULT_CONFIG_PATH)
    out = capsys.readouterr().out
    assert "Antenna separation" in out
    assert "12 bits" in out
