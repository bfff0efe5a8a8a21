"""Tests for signal containers, conversions and seeded noise."""

import math

import numpy as np
import pytest

from duplexsim.errors import SignalError
from duplexsim.tools import (
    ComplexSignal,
    awgn,
    dbm_to_watts,
    make_rng,
    measure_power,
    thermal_floor_power,
    watts_to_dbm,
)


def test_power_conversions():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert watts_to_dbm(1e-3) == pytest.approx(0.0)
    assert watts_to_dbm(0.0) == -math.inf
    np.testing.assert_allclose(dbm_to_watts(np.array([0.0, 10.0])), [1e-3, 1e-2])


def test_thermal_floor_for_table_bandwidth():
    assert thermal_floor_power(12.5e6) == pytest.approx(-103.03, abs=0.01)
    with pytest.raises(SignalError):
        thermal_floor_power(0.0)


def test_awgn_power_and_determinism():
    a = awgn(100_000, 2e-3, seed=(7, 1))
    b = awgn(100_000, 2e-3, seed=(7, 1))
    c = awgn(100_000, 2e-3, seed=(7, 2))

    assert watts_to_dbm(measure_power(a)) == pytest.approx(watts_to_dbm(2e-3), abs=0.1)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_awgn_edge_cases():
    assert not np.any(awgn(16, 0.0, seed=1).samples)
    assert len(awgn(0, 1.0, seed=1)) == 0
    with pytest.raises(SignalError):
        awgn(16, -1.0, seed=1)


def test_awgn_is_circular():
    s = awgn(200_000, 1.0, seed=3).samples
    assert np.mean(s.real ** 2) == pytest.approx(0.5, rel=0.02)
    assert abs(np.mean(s ** 2)) < 0.02


def test_measure_power_rejects_empty():
    with pytest.raises(SignalError):
        measure_power(ComplexSignal(np.zeros(0), 1.0))


def test_signal_arithmetic_checks_lengths():
    a = ComplexSignal(np.ones(4), 1.0)
    assert measure_power(a + a) == pytest.approx(4.0)
    with pytest.raises(SignalError):
        a - ComplexSignal(np.ones(3), 1.0)
    with pytest.raises(SignalError):
        ComplexSignal(np.ones(3), 0.0)


def test_make_rng_streams_are_reproducible():
    first = make_rng((1, 2, 3)).standard_normal(8)
    np.testing.assert_array_equal(first, make_rng((1, 2, 3)).standard_normal(8))
    assert not np.array_equal(first, make_rng((1, 2, 4)).standard_normal(8))
