"""Tests for the measurements and the twin-run SINR protocol."""

import math

import numpy as np
import pytest

from duplexsim.errors import ConfigError, SignalError
from duplexsim.tools import (
    REFERENCE,
    CancellerKind,
    SeedSet,
    SinrReport,
    SinrRow,
    apply_iq_imbalance,
    dbm_to_watts,
    draw_si_channel,
    estimate_delay,
    full_chain,
    irr_to_response,
    linear_to_db,
    measure_detector_noise,
    measure_irr,
    measure_k_factor,
    measure_tone_powers,
    reference_sinr,
    sinr_point,
    sinr_twin_run,
    thermal_noise_powers,
)
from tests.helpers import random_signal, tone

SEEDS = SeedSet(device=1, frame=0)


# --- IRR and K-factor ---

@pytest.mark.parametrize("irr_db", [20.0, 30.0, 40.0])
def test_measured_irr_matches_response(irr_db):
    before = tone(37, 1024)
    after = apply_iq_imbalance(before, irr_to_response(irr_db, 0.7))
    assert measure_irr(before, after) == pytest.approx(irr_db, abs=0.01)


def test_ideal_mixer_has_infinite_irr():
    before = tone(37, 1024)
    assert measure_irr(before, apply_iq_imbalance(before, irr_to_response(math.inf, 0.0))) == math.inf


def test_irr_needs_a_tone(rng):
    noise = random_signal(rng, 1024)
    with pytest.raises(SignalError):
        measure_irr(noise, noise)
    with pytest.raises(SignalError):
        measure_irr(tone(0, 1024), tone(0, 1024))
    with pytest.raises(SignalError):
        measure_irr(tone(5, 1024), tone(5, 512))


def test_k_factor_of_los_channels():
    channels = [draw_si_channel(math.inf, 40.0, 7, (1, seed)) for seed in range(100)]
    assert measure_k_factor(channels) == math.inf


@pytest.mark.parametrize("size", [0, 1, 99])
def test_k_factor_needs_an_ensemble(size):
    channels = [draw_si_channel(20.0, 40.0, 7, (1, seed)) for seed in range(size)]
    with pytest.raises(SignalError, match="at least 100"):
        measure_k_factor(channels)


def test_tone_power_reads_the_tone_bin():
    s = tone(10, 1024, power=dbm_to_watts(-20.0), sample_rate=1024.0)
    at_tone, elsewhere = measure_tone_powers(s, [10.0, 20.0])
    assert at_tone == pytest.approx(-20.0, abs=1e-9)
    assert elsewhere < -200.0


# --- reports ---

def test_sinr_report_lookup():
    report = SinrReport((
        SinrRow(0.0, REFERENCE, 15.0, -60.0),
        SinrRow(0.0, "linear", 10.0, -55.0),
        SinrRow(5.0, REFERENCE, 15.1, -60.0),
        SinrRow(5.0, "linear", 8.0, -53.0),
    ))
    assert len(report) == 4
    assert report.curve(CancellerKind.LINEAR) == [10.0, 8.0]
    assert report.curve(REFERENCE) == [15.0, 15.1]
    assert report.at(5.0, "linear").residual_dbm == -53.0
    with pytest.raises(KeyError):
        report.at(10.0, CancellerKind.JOINT)


# --- detector noise ---

@pytest.mark.slow
@pytest.mark.parametrize("separation", [30.0, 40.0, 50.0])
@pytest.mark.parametrize("rf_cancellation", [20.0, 30.0, 40.0])
def test_detector_noise_matches_budget(linear_cfg, separation, rf_cancellation):
    trial = linear_cfg.replace(antenna_separation_db=separation, rf_cancellation_db=rf_cancellation)
    measured, gains, tx_vga = measure_detector_noise(trial, 15.0, SEEDS, 20000)
    predicted = sum(thermal_noise_powers(trial, tx_vga, gains.rx_vga_db, gains.agc_db))
    assert abs(linear_to_db(measured / predicted)) < 0.5


# --- SINR ---

LOW_POWERS = (0.0, 2.5, 5.0, 7.5, 10.0, 12.5)
HIGH_POWERS = (15.0, 17.5, 20.0, 22.5, 25.0)


@pytest.fixture(scope="module")
def sinr_at(cfg):
    """SINR per canceller for (tx power, device), each point run once per module."""
    cache = {}

    def rows(tx_power, device=1):
        key = (tx_power, device)
        if key not in cache:
            cache[key] = {row.canceller: row.sinr_db for row in sinr_point(cfg, tx_power, SeedSet(device, 0))}
        return cache[key]

    return rows


@pytest.mark.slow
@pytest.mark.parametrize("tx_power", [0.0, 25.0])
def test_reference_sinr_follows_soi_margin(cfg, tx_power):
    row = reference_sinr(cfg, tx_power, SEEDS)
    assert row.canceller == REFERENCE
    assert row.sinr_db == pytest.approx(15.0, abs=0.5)


@pytest.mark.slow
@pytest.mark.parametrize("device", [1, 2, 3, 4, 5])
def test_calibration_delay_keeps_the_leading_tap(cfg, device):
    y_cal, diag = full_chain(False, 15.0, cfg, SeedSet(device, 0), cfg.calibration_samples)
    m = cfg.canceller_memory
    assert estimate_delay(diag.tx_samples, y_cal, m, m) == 0


@pytest.mark.slow
@pytest.mark.parametrize("device", [1, 2, 3, 4, 5])
def test_joint_canceller_approaches_reference_on_every_device(sinr_at, device):
    rows = sinr_at(15.0, device)
    assert rows["joint"] > rows[REFERENCE] - 3.0


@pytest.mark.slow
@pytest.mark.parametrize("device", [1, 2, 3])
@pytest.mark.parametrize("tx_power", [20.0, 22.5, 25.0])
def test_canceller_ordering_at_high_power(sinr_at, tx_power, device):
    rows = sinr_at(tx_power, device)
    joint = rows["joint"]
    wl = rows["widely-linear"]
    ph = rows["nonlinear-ph"]
    linear = rows["linear"]

    assert joint > wl > ph >= linear
    assert ph - linear <= 2.0
    for kind in CancellerKind:
        assert rows[kind.value] <= rows[REFERENCE] + 0.5


@pytest.mark.slow
@pytest.mark.parametrize("device", [1, 2])
def test_widely_linear_plateau_then_decline(sinr_at, device):
    for tx_power in LOW_POWERS:
        rows = sinr_at(tx_power, device)
        assert rows["widely-linear"] > rows[REFERENCE] - 1.0, tx_power
    # At 15 dBm the VM noise and PA distortion together cost a little more than 1 dB.
    rows = sinr_at(15.0, device)
    assert rows["widely-linear"] > rows[REFERENCE] - 1.5

    curve = [sinr_at(tx_power, device)["widely-linear"] for tx_power in HIGH_POWERS]
    assert all(b < a for a, b in zip(curve, curve[1:])), curve


def test_linear_canceller_on_ideal_hardware(cfg):
    ideal = cfg.replace(pa_nonlinear=False, rx_nonlinear=False, iq_imbalance=False, quantization=False)
    linear = sinr_twin_run(ideal, 15.0, CancellerKind.LINEAR, SEEDS)
    assert linear == pytest.approx(reference_sinr(ideal, 15.0, SEEDS).sinr_db, abs=1.0)


def test_sinr_point_rejects_tx_power_out_of_range(cfg):
    with pytest.raises(ConfigError):
        sinr_point(cfg, 35.0, SEEDS)


def test_sinr_is_reproducible(cfg):
    short = cfg.replace(calibration_samples=4000, evaluation_samples=4000)
    first = sinr_point(short, 10.0, SEEDS, kinds=(CancellerKind.LINEAR,))
    second = sinr_point(short, 10.0, SEEDS, kinds=(CancellerKind.LINEAR,))
    assert first == second
    assert np.isfinite([row.sinr_db for row in first]).all()
