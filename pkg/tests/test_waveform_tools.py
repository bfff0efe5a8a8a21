"""Tests for the OFDM waveform generator."""

import itertools

import numpy as np
import pytest

from duplexsim.errors import SignalError
from duplexsim.tools import ComplexSignal, OfdmParams, generate_ofdm, ofdm_autocorrelation, papr, qam16


def test_default_numerology():
    params = OfdmParams()
    assert params.fft_size == 256
    assert params.cp_length == 64
    assert params.symbol_length == 320
    assert params.sample_rate == pytest.approx(64e6)
    assert params.occupied_bandwidth_hz() == pytest.approx(12e6)
    assert sorted(np.abs(params.data_bins)) == sorted(list(range(1, 25)) * 2)


def test_qam16_has_unit_energy():
    bits = np.array(list(itertools.product([0, 1], repeat=4))).reshape(-1)
    symbols = qam16(bits)
    assert len(set(np.round(symbols, 12))) == 16
    assert np.mean(np.abs(symbols) ** 2) == pytest.approx(1.0)


def test_waveform_length_power_and_seed():
    params = OfdmParams(n_symbols=200)
    s = generate_ofdm(params, seed=5)
    assert len(s) == 200 * 320
    assert 10 * np.log10(np.mean(np.abs(s.samples) ** 2)) == pytest.approx(0.0, abs=0.2)
    np.testing.assert_array_equal(s.samples, generate_ofdm(params, seed=5).samples)


def test_cyclic_prefix_repeats_symbol_tail():
    s = generate_ofdm(OfdmParams(n_symbols=1), seed=1).samples
    np.testing.assert_allclose(s[:64], s[-64:])


def test_energy_stays_in_occupied_band():
    params = OfdmParams(n_symbols=100)
    s = generate_ofdm(params, seed=2)
    spectrum = np.abs(np.fft.fft(s.samples)) ** 2
    freqs = np.fft.fftfreq(len(s), 1.0 / params.sample_rate)
    in_band = spectrum[np.abs(freqs) <= 6.25e6].sum() / spectrum.sum()
    # Rectangular symbol edges put about 1.3% into the sinc sidelobes of the edge bins.
    assert in_band >= 0.985


def test_papr_over_thousand_symbols():
    s = generate_ofdm(OfdmParams(n_symbols=1000), seed=11)
    assert 8.0 <= papr(s) <= 12.0


def test_expected_autocorrelation_matches_waveform():
    params = OfdmParams(n_symbols=400)
    x = generate_ofdm(params, seed=3).samples
    expected = ofdm_autocorrelation(params, [0, 1, 2])
    assert expected[0] == pytest.approx(1.0)
    for lag in (1, 2):
        measured = np.mean(x[lag:] * np.conj(x[:-lag])) / np.mean(np.abs(x) ** 2)
        assert abs(measured - expected[lag]) < 0.03


def test_invalid_inputs():
    with pytest.raises(SignalError):
        OfdmParams(n_data_subcarriers=64)
    with pytest.raises(SignalError):
        papr(ComplexSignal(np.zeros(8), 1.0))
    assert len(generate_ofdm(OfdmParams(n_symbols=0), seed=1)) == 0
