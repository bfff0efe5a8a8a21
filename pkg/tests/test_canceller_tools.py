"""Tests for the convolution matrices and digital cancellers."""

import numpy as np
import pytest

from duplexsim.errors import EstimationError, RankDeficientError
from duplexsim.tools import (
    CancellerEstimate,
    CancellerKind,
    PhModel,
    apply_ph,
    build_augmented_matrix,
    build_joint_matrix,
    build_linear_matrix,
    build_ph_matrix,
    cancel,
    estimate,
    estimate_delay,
    load_estimate,
    save_estimate,
)
from duplexsim.tools.canceller_tools import regenerate
from tests.helpers import random_signal

M = 4


def _taps(rng, n, scale=1.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _causal(taps, x):
    return np.convolve(x, taps)[:x.size]


def _relative_error(estimate_, truth):
    return np.linalg.norm(estimate_ - truth) / np.linalg.norm(truth)


# --- matrices ---

def test_linear_matrix_of_impulse():
    x = np.array([0, 0, 1, 0, 0, 0], dtype=complex)
    expected = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]])
    np.testing.assert_array_equal(build_linear_matrix(x, 3), expected)


def test_linear_matrix_is_convolution(rng):
    x = random_signal(rng, 50).samples
    h = _taps(rng, 5)
    np.testing.assert_allclose(build_linear_matrix(x, 5) @ h, np.convolve(x, h)[4:50])


def test_memoryless_matrix_is_the_signal(rng):
    x = random_signal(rng, 20).samples
    np.testing.assert_array_equal(build_linear_matrix(x, 1)[:, 0], x)


@pytest.mark.parametrize("memory, length", [(0, 10), (11, 10)])
def test_linear_matrix_errors(memory, length):
    with pytest.raises(EstimationError):
        build_linear_matrix(np.ones(length, dtype=complex), memory)


def test_augmented_matrix_columns(rng):
    x = random_signal(rng, 10).samples
    a = build_augmented_matrix(x, 2)
    assert a.shape == (9, 4)
    np.testing.assert_allclose(a[0], [x[1], x[0], np.conj(x[1]), np.conj(x[0])])


def test_ph_matrix_basis_columns():
    c = 0.6 + 0.2j
    a = build_ph_matrix(np.full(5, c), order=3, memory=1)
    np.testing.assert_allclose(a[0], [c, abs(c) ** 2 * c])
    np.testing.assert_array_equal(build_ph_matrix(np.full(5, c), 1, 2), build_linear_matrix(np.full(5, c), 2))


def test_ph_matrix_reproduces_model(rng):
    x = random_signal(rng, 200, power=0.5)
    model = PhModel(5, 3, {1: _taps(rng, 3), 3: _taps(rng, 3, 0.1), 5: _taps(rng, 3, 0.01)})
    theta = np.concatenate([model.branch_taps[p] for p in (1, 3, 5)])
    np.testing.assert_allclose(build_ph_matrix(x, 5, 3) @ theta, apply_ph(x, model).samples[2:])


@pytest.mark.parametrize("order, columns", [(3, 30), (5, 40)])
def test_joint_matrix_column_count(rng, order, columns):
    x = random_signal(rng, 100).samples
    a = build_joint_matrix(x, order, 10)
    assert a.shape[1] == columns
    np.testing.assert_array_equal(a[:, :20], build_augmented_matrix(x, 10))


@pytest.mark.parametrize("order", [1, 4])
def test_joint_matrix_order_errors(rng, order):
    with pytest.raises(EstimationError):
        build_joint_matrix(random_signal(rng, 100).samples, order, 10)


# --- estimation ---

def _widely_linear_scene(rng, n=4000):
    x = random_signal(rng, n).samples
    h1, h2 = _taps(rng, M), _taps(rng, M, 0.05)
    return x, h1, h2, _causal(h1, x) + _causal(h2, np.conj(x))


def test_widely_linear_recovery(rng):
    x, h1, h2, y = _widely_linear_scene(rng)
    est = estimate(CancellerKind.WIDELY_LINEAR, x, y, M, 1)
    assert _relative_error(est.h1, h1) < 1e-8
    assert _relative_error(est.h2, h2) < 1e-8


def test_ph_recovery(rng):
    x = random_signal(rng, 4000, power=0.5)
    model = PhModel(5, M, {1: _taps(rng, M), 3: _taps(rng, M, 0.1), 5: _taps(rng, M, 0.01)})
    est = estimate(CancellerKind.NONLINEAR_PH, x, apply_ph(x, model), M, 5)
    for p in (1, 3, 5):
        assert _relative_error(est.branch(p), model.branch_taps[p]) < 1e-8


def test_joint_recovery_and_cancellation(rng):
    x, h1, h2, y = _widely_linear_scene(rng)
    f3, f5 = _taps(rng, M, 0.1), _taps(rng, M, 0.01)
    y = y + _causal(f3, np.abs(x) ** 2 * x) + _causal(f5, np.abs(x) ** 4 * x)

    est = estimate(CancellerKind.JOINT, x, y, M, 5)
    for got, truth in ((est.h1, h1), (est.h2, h2), (est.branch(3), f3), (est.branch(5), f5)):
        assert _relative_error(got, truth) < 1e-8

    residual = cancel(est, x, y).samples
    assert 10 * np.log10(np.mean(np.abs(residual) ** 2) / np.mean(np.abs(y) ** 2)) < -200


def test_real_input_makes_widely_linear_rank_deficient(rng):
    x = rng.standard_normal(1000).astype(complex)
    with pytest.raises(RankDeficientError):
        estimate(CancellerKind.WIDELY_LINEAR, x, x, M, 1)


def test_column_space_nesting_on_calibration_data(rng):
    x = random_signal(rng, 3000, power=0.5).samples
    y = (_causal(_taps(rng, 3), x) + 0.03 * np.conj(x) + 0.05 * np.abs(x) ** 2 * x
         + random_signal(rng, 3000, power=1e-4).samples)

    def calibration_residual(kind):
        est = estimate(kind, x, y, 5, 5)
        return np.mean(np.abs(y[4:] - regenerate(est, x)) ** 2)

    power = {kind: calibration_residual(kind) for kind in CancellerKind}
    slack = 1e-12 * np.mean(np.abs(y) ** 2)
    assert power[CancellerKind.JOINT] <= power[CancellerKind.WIDELY_LINEAR] + slack
    assert power[CancellerKind.JOINT] <= power[CancellerKind.NONLINEAR_PH] + slack
    assert power[CancellerKind.WIDELY_LINEAR] <= power[CancellerKind.LINEAR] + slack
    assert power[CancellerKind.NONLINEAR_PH] <= power[CancellerKind.LINEAR] + slack


def test_scaling_the_input_rescales_coefficients(rng):
    x = random_signal(rng, 2000, power=0.5).samples
    y = _causal(_taps(rng, 3), x) + 0.05 * np.abs(x) ** 2 * x + random_signal(rng, 2000, power=1e-3).samples
    alpha = 2.0 - 1.0j

    base = estimate(CancellerKind.NONLINEAR_PH, x, y, 3, 3)
    scaled = estimate(CancellerKind.NONLINEAR_PH, alpha * x, y, 3, 3)
    np.testing.assert_allclose(scaled.branch(1), base.branch(1) / alpha, rtol=1e-8)
    np.testing.assert_allclose(scaled.branch(3), base.branch(3) / (alpha * abs(alpha) ** 2), rtol=1e-8)


def test_pure_noise_estimate_shrinks_with_length(rng):
    norms = []
    for n in (2000, 32000):
        x = random_signal(rng, n).samples
        noise = random_signal(rng, n).samples
        norms.append(np.linalg.norm(estimate(CancellerKind.LINEAR, x, noise, M, 1).coefficients) ** 2)
    assert norms[1] < norms[0] / 4


def test_calibration_length_is_checked(rng):
    x = random_signal(rng, 100).samples
    with pytest.raises(EstimationError):
        estimate(CancellerKind.JOINT, x, x, 10, 5)


# --- cancellation ---

def test_zero_coefficients_leave_signal(rng):
    x, y = random_signal(rng, 50).samples, random_signal(rng, 50).samples
    est = CancellerEstimate(CancellerKind.LINEAR, M, 1, np.zeros(M))
    np.testing.assert_array_equal(cancel(est, x, y).samples, y[M - 1:])


def test_estimate_rejects_wrong_coefficient_count():
    with pytest.raises(EstimationError):
        CancellerEstimate(CancellerKind.WIDELY_LINEAR, M, 1, np.zeros(M))


def test_delay_search_and_aligned_cancellation(rng):
    x = random_signal(rng, 5000).samples
    h = np.array([1.0, 0.3j, -0.1 + 0.05j])
    y = np.concatenate([np.zeros(3), _causal(h, x)[:-3]])

    delay = estimate_delay(x, y, max_lag=10, memory=3)
    est = estimate(CancellerKind.LINEAR, x, y, 3, 1, delay=delay)

    assert delay == 3
    assert _relative_error(est.h1, h) < 1e-8
    assert np.max(np.abs(cancel(est, x, y).samples)) < 1e-10


def test_delay_search_keeps_weak_leading_tap(rng):
    x = random_signal(rng, 5000).samples
    h = np.array([0.3, 1.0, 0.5j, -0.2])
    y = _causal(h, x)

    corr = np.array([np.vdot(x[:x.size - k], y[k:]) for k in range(6)])
    assert int(np.argmax(np.abs(corr))) == 1

    delay = estimate_delay(x, y, max_lag=5, memory=4)
    est = estimate(CancellerKind.LINEAR, x, y, 4, 1, delay=delay)

    assert delay == 0
    assert _relative_error(est.h1, h) < 1e-8


def test_delay_search_range_must_fit(rng):
    x = random_signal(rng, 20).samples
    with pytest.raises(EstimationError):
        estimate_delay(x, x, max_lag=18, memory=4)


def test_coefficient_file_roundtrip(tmp_path, rng):
    est = CancellerEstimate(CancellerKind.JOINT, 2, 5, _taps(rng, 8), delay=1)
    path = save_estimate(est, tmp_path / "joint.coef")

    assert path.read_text().splitlines()[0] == "# kind=joint M=2 P=5 delay=1"
    loaded = load_estimate(path)
    assert loaded.kind is CancellerKind.JOINT
    np.testing.assert_array_equal(loaded.coefficients, est.coefficients)


def test_malformed_coefficient_file(tmp_path):
    path = tmp_path / "bad.coef"
    path.write_text("# kind=linear M=2 P=1\n1.0 0.0\n", encoding="utf-8")
    with pytest.raises(EstimationError):
        load_estimate(path)
