"""Analog impairment stages of the direct-conversion full-duplex transceiver.

Every stage is a pure function of (signal, parameters, seed):

- IQ mixers: widely-linear g1 * x + g2 * conj(x)
- PA: parallel Hammerstein model calibrated against the two-tone IM3 rule
- generic stages: memoryless 2nd/3rd order polynomial plus thermal noise
- SI coupling channel, RF cancellation through a vector modulator
- AGC and per-rail ADC quantizer
"""

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import linalg, optimize, signal

from ..config import StageSpec, TransceiverConfig
from ..errors import ConfigError, SignalError
from .signal_tools import (
    ComplexSignal,
    SeedLike,
    complex_gaussian,
    db_to_linear,
    dbm_to_watts,
    make_rng,
    measure_power,
    thermal_floor_power,
    watts_to_dbm,
)
from .waveform_tools import OfdmParams, ofdm_autocorrelation

logger = logging.getLogger(__name__)

DEFAULT_BANDWIDTH_HZ = 12.5e6


# =============================================================================
# IQ IMBALANCE
# =============================================================================

@dataclass(frozen=True, eq=False)
class WidelyLinearResponse:
    """Direct (g1) and conjugate (g2) impulse responses of an IQ mixer."""

    direct: np.ndarray
    conjugate: np.ndarray

    def __post_init__(self):
        direct = np.atleast_1d(np.asarray(self.direct, dtype=np.complex128))
        conjugate = np.atleast_1d(np.asarray(self.conjugate, dtype=np.complex128))
        if direct.size == 0 or conjugate.size == 0:
            raise SignalError("Widely-linear responses need at least one tap each")
        object.__setattr__(self, "direct", direct)
        object.__setattr__(self, "conjugate", conjugate)

    @property
    def irr_db(self) -> float:
        """Image rejection ratio at DC; +inf for an ideal mixer."""
        g1 = abs(self.direct.sum()) ** 2
        g2 = abs(self.conjugate.sum()) ** 2
        if g2 == 0:
            return math.inf
        return 10.0 * math.log10(g1 / g2)


def _fir(taps: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Causal linear convolution truncated to the input length."""
    if taps.size == 1:
        return taps[0] * x
    return signal.lfilter(taps, [1.0], x)


def apply_iq_imbalance(s: ComplexSignal, r: WidelyLinearResponse) -> ComplexSignal:
    """Applies g1 * s + g2 * conj(s)."""
    x = s.samples
    return s.with_samples(_fir(r.direct, x) + _fir(r.conjugate, np.conj(x)))


def irr_to_response(irr_db: float, image_phase: float = 0.0) -> WidelyLinearResponse:
    """Builds a frequency-flat IQ mixer response with the requested IRR.

    Args:
        irr_db: Image rejection ratio in dB; +inf gives an ideal mixer.
        image_phase: Phase of the image coefficient in radians.

    Returns:
        WidelyLinearResponse: g1 = 1, g2 = 10^(-irr/20) e^(j phase).
    """
    if math.isnan(irr_db):
        raise SignalError("IRR must be a number")
    magnitude = 0.0 if math.isinf(irr_db) and irr_db > 0 else 10.0 ** (-irr_db / 20.0)
    return WidelyLinearResponse(np.array([1.0 + 0j]), np.array([magnitude * np.exp(1j * image_phase)]))


# =============================================================================
# PARALLEL HAMMERSTEIN PA
# =============================================================================

@dataclass(frozen=True, eq=False)
class PhModel:
    """Odd-order parallel Hammerstein model, branch p -> FIR taps f_p."""

    order: int
    memory: int
    branch_taps: Dict[int, np.ndarray]

    def __post_init__(self):
        if self.order < 1 or self.order % 2 == 0:
            raise ConfigError(f"PH model order must be odd and positive, got {self.order}")
        taps = {}
        for p in range(1, self.order + 1, 2):
            branch = np.asarray(self.branch_taps.get(p, np.zeros(self.memory)), dtype=np.complex128)
            if branch.size != self.memory:
                raise ConfigError(f"Branch {p} has {branch.size} taps, expected {self.memory}")
            taps[p] = branch
        extra = set(self.branch_taps) - set(taps)
        if extra:
            raise ConfigError(f"PH model has invalid branches {sorted(extra)}; only odd p <= {self.order}")
        object.__setattr__(self, "branch_taps", taps)

    @property
    def branches(self):
        return sorted(self.branch_taps)

    @property
    def is_linear(self) -> bool:
        return all(not np.any(self.branch_taps[p]) for p in self.branches if p > 1)


def basis_function(x: np.ndarray, p: int) -> np.ndarray:
    """psi_p(x) = |x|^(p-1) x."""
    if p == 1:
        return x
    return np.abs(x) ** (p - 1) * x


def apply_ph(s: ComplexSignal, m: PhModel) -> ComplexSignal:
    """Evaluates the PH model: sum over odd p of f_p * psi_p(s)."""
    x = s.samples
    y = np.zeros_like(x)
    for p in m.branches:
        taps = m.branch_taps[p]
        if np.any(taps):
            y = y + _fir(taps, basis_function(x, p))
    return s.with_samples(y)


@dataclass(frozen=True)
class TwoToneResult:
    """Two-tone test readings in dBm.

    The fundamental is the lower tone and IM2 the difference-frequency
    product. IM3 and IM5 add the products on both sides of the tone pair.
    A cubic whose summed IM3 meets the intercept law at per-tone input power
    gives a noise-like load the distortion that law predicts at its total
    input power.
    """

    fundamental_dbm: float
    im2_dbm: float
    im3_dbm: float
    im5_dbm: float


def two_tone_test(
    fn: Callable[[np.ndarray], np.ndarray],
    p_in_dbm: float,
    n_fft: int = 4096,
    bins: Tuple[int, int] = (100, 110),
) -> TwoToneResult:
    """Drives a memoryless-or-FIR nonlinearity with two equal tones.

    Tones sit exactly on FFT bins and the record is periodic, so the products
    are read without leakage from the steady-state second half.

    Args:
        fn: Maps input samples to output samples.
        p_in_dbm: Power of each input tone.
        n_fft: Analysis length.
        bins: FFT bins of the two tones.

    Returns:
        TwoToneResult: Fundamental and intermodulation product powers.
    """
    k1, k2 = bins
    amplitude = math.sqrt(dbm_to_watts(p_in_dbm))
    n = np.arange(2 * n_fft)
    x = amplitude * (np.exp(2j * np.pi * k1 * n / n_fft) + np.exp(2j * np.pi * k2 * n / n_fft))
    y = np.asarray(fn(x))[n_fft:]
    spectrum = np.abs(np.fft.fft(y) / n_fft) ** 2

    def read(*ks):
        return watts_to_dbm(sum(spectrum[k % n_fft] for k in ks))

    return TwoToneResult(
        fundamental_dbm=read(k1),
        im2_dbm=read(k2 - k1),
        im3_dbm=read(2 * k1 - k2, 2 * k2 - k1),
        im5_dbm=read(3 * k1 - 2 * k2, 3 * k2 - 2 * k1),
    )


def _pa_model(a1: float, a3: complex, a5: complex, order: int, relative_taps: np.ndarray) -> PhModel:
    branch_taps = {1: a1 * relative_taps}
    if order >= 3:
        branch_taps[3] = a3 * relative_taps
    if order >= 5:
        branch_taps[5] = a5 * relative_taps
    return PhModel(order=order, memory=relative_taps.size, branch_taps=branch_taps)


def pa_from_specs(
    gain_db: float,
    iip3_dbm: Optional[float],
    order: int = 5,
    memory_taps=(1.0, -0.05, 0.01),
    fifth_order_backoff_db: float = 30.0,
    fifth_order_reference_dbm: float = 25.0,
) -> PhModel:
    """Builds a PH PA model from its gain and IIP3.

    The third-order branch magnitude is fitted with a secant search so a
    two-tone test at IIP3 - 20 dBm per tone meets
    P_IM3 = P_out - 2 (IIP3 - P_in), with P_IM3 summed over both products
    and P_out the small-signal tone output (memory ripple included). The
    fifth-order branch is in quadrature with the third and its contribution
    to the IM3 products sits `fifth_order_backoff_db` below the third-order
    one when the PA delivers `fifth_order_reference_dbm`. All branches share
    the relative memory taps.

    Args:
        gain_db: Small-signal gain.
        iip3_dbm: Input third-order intercept point; None or +inf for a linear PA.
        order: Highest odd nonlinearity order, at least 3.
        memory_taps: Relative FIR taps of every branch, leading tap first.
        fifth_order_backoff_db: Fifth- vs third-order IM3 contribution at the reference.
        fifth_order_reference_dbm: PA output power where the backoff applies.

    Returns:
        PhModel: Calibrated PA model.

    Raises:
        ConfigError: On an invalid order or memory, or when the fit does not converge.
    """
    if order < 3 or order % 2 == 0:
        raise ConfigError(f"PA model order must be odd and >= 3, got {order}")
    relative = np.asarray(memory_taps, dtype=np.complex128)
    if relative.size == 0 or relative[0] == 0:
        raise ConfigError("PA memory taps need a nonzero leading tap")
    relative = relative / relative[0]

    g = db_to_linear(gain_db)
    a1 = math.sqrt(g)
    if iip3_dbm is None or math.isinf(iip3_dbm):
        return _pa_model(a1, 0.0, 0.0, order, relative)

    iip3_w = dbm_to_watts(iip3_dbm)
    a3_guess = a1 / (math.sqrt(2.0) * iip3_w)
    # Per-tone input at the reference output power
    ref_tone_w = dbm_to_watts(fifth_order_reference_dbm - gain_db) / 2.0
    a5_mag = 10.0 ** (-fifth_order_backoff_db / 20.0) * a3_guess / (5.0 * ref_tone_w)

    p_cal = iip3_dbm - 20.0

    def model(a3_mag: float, a5: complex = 1j * a5_mag) -> PhModel:
        return _pa_model(a1, -a3_mag, a5, order, relative)

    def tones(pa: PhModel) -> TwoToneResult:
        return two_tone_test(lambda x: apply_ph(ComplexSignal(x, 1.0), pa).samples, p_cal)

    target = tones(model(0.0, 0j)).fundamental_dbm - 2.0 * (iip3_dbm - p_cal)

    def mismatch(a3_mag: float) -> float:
        return tones(model(a3_mag)).im3_dbm - target

    try:
        a3_mag = optimize.newton(mismatch, x0=a3_guess, x1=1.05 * a3_guess, tol=1e-10 * a3_guess, maxiter=50)
    except RuntimeError as exc:
        raise ConfigError(f"PA fit to IIP3 {iip3_dbm:g} dBm did not converge: {exc}") from None
    if not math.isfinite(a3_mag):
        raise ConfigError(f"PA fit to IIP3 {iip3_dbm:g} dBm diverged")
    logger.debug("PA calibration: |a3| %.6g (closed form %.6g), |a5| %.6g", a3_mag, a3_guess, a5_mag)
    return model(float(a3_mag))


@functools.lru_cache(maxsize=32)
def _cached_pa(gain_db, iip3_dbm, order, memory_taps, backoff_db, reference_dbm) -> PhModel:
    return pa_from_specs(gain_db, iip3_dbm, order, memory_taps, backoff_db, reference_dbm)


def pa_from_config(cfg: TransceiverConfig) -> PhModel:
    """PA model for a configuration; linear when PA nonlinearity is disabled."""
    iip3 = cfg.pa_iip3_dbm if cfg.pa_nonlinear else None
    return _cached_pa(cfg.pa_gain_db, iip3, cfg.pa_order, tuple(cfg.pa_memory_taps),
                      cfg.pa_fifth_order_backoff_db, cfg.pa_fifth_order_reference_dbm)


# =============================================================================
# GENERIC STAGES
# =============================================================================

def stage_polynomial(spec: StageSpec) -> Tuple[float, float, float]:
    """Memoryless coefficients (a1, a2, a3) of a stage.

    a2 |x|^2 and a3 |x|^2 x are scaled so their two-tone products follow
    P_n = P_out - (n-1)(IIPn - P_in) with per-tone powers, IM2 read at the
    difference frequency and IM3 summed over both products.
    """
    g = db_to_linear(spec.gain_db)
    a1 = math.sqrt(g)
    a2 = a3 = 0.0
    if spec.iip2_dbm is not None and not math.isinf(spec.iip2_dbm):
        a2 = math.sqrt(g / dbm_to_watts(spec.iip2_dbm))
    if spec.iip3_dbm is not None and not math.isinf(spec.iip3_dbm):
        a3 = -a1 / (math.sqrt(2.0) * dbm_to_watts(spec.iip3_dbm))
    return a1, a2, a3


def stage_transfer(x: np.ndarray, spec: StageSpec) -> np.ndarray:
    """Noiseless stage output a1 x + a2 |x|^2 + a3 |x|^2 x."""
    a1, a2, a3 = stage_polynomial(spec)
    y = a1 * x
    if a2 or a3:
        envelope = np.abs(x) ** 2
        if a2:
            y = y + a2 * envelope
        if a3:
            y = y + a3 * envelope * x
    return y


def stage_noise_power(spec: StageSpec, thermal_floor_w: float) -> float:
    """Output-referred noise added by a stage, (F - 1) g p_th."""
    return (db_to_linear(spec.nf_db) - 1.0) * db_to_linear(spec.gain_db) * thermal_floor_w


def apply_stage(
    s: ComplexSignal, spec: StageSpec, seed: SeedLike, thermal_floor_w: Optional[float] = None
) -> ComplexSignal:
    """Passes a signal through an amplifier/mixer stage.

    Args:
        s: Stage input.
        spec: Gain, NF and intercept points.
        seed: Seed of the stage noise stream.
        thermal_floor_w: Thermal floor p_th in watts; None uses 12.5 MHz.

    Returns:
        ComplexSignal: Polynomial output plus (F - 1) g p_th of Gaussian noise.
    """
    if thermal_floor_w is None:
        thermal_floor_w = dbm_to_watts(thermal_floor_power(DEFAULT_BANDWIDTH_HZ))
    y = stage_transfer(s.samples, spec)
    noise_power = stage_noise_power(spec, thermal_floor_w)
    if noise_power > 0 and len(s):
        y = y + complex_gaussian(make_rng(seed), len(s), noise_power)
    return s.with_samples(y)


def cascade_noise_factor(stages) -> float:
    """Friis noise factor of a stage cascade (linear units)."""
    total = 0.0
    gain = 1.0
    for index, spec in enumerate(stages):
        f = db_to_linear(spec.nf_db)
        total += f if index == 0 else (f - 1.0) / gain
        gain *= db_to_linear(spec.gain_db)
    return total


# =============================================================================
# SI CHANNEL AND RF CANCELLATION
# =============================================================================

@dataclass(frozen=True, eq=False)
class SiChannel:
    """SI coupling channel: LOS tap followed by diffuse taps."""

    taps: np.ndarray
    k_factor_db: float
    total_gain_db: float

    @property
    def los_power(self) -> float:
        return float(abs(self.taps[0]) ** 2)

    @property
    def diffuse_power(self) -> float:
        return float(np.sum(np.abs(self.taps[1:]) ** 2))

    @property
    def is_coupled(self) -> bool:
        return bool(np.any(self.taps))


def draw_si_channel(
    k_factor_db: float,
    antenna_separation_db: float,
    n_diffuse_taps: int,
    seed: SeedLike,
    decay_db_per_tap: float = 3.0,
) -> SiChannel:
    """Draws a Rician SI channel realization.

    The LOS tap has zero phase; diffuse taps are complex Gaussian with an
    exponential power profile. Each realization is normalized so the total
    power is exactly 10^(-separation/10) and LOS/diffuse is exactly K.

    Args:
        k_factor_db: Rician K-factor; +inf for a pure LOS channel.
        antenna_separation_db: Total coupling attenuation; +inf for no coupling.
        n_diffuse_taps: Number of diffuse taps after the LOS tap.
        seed: Seed of the diffuse tap draw.
        decay_db_per_tap: Power decay of the diffuse profile.

    Returns:
        SiChannel: Channel realization.
    """
    if n_diffuse_taps < 1:
        raise ConfigError(f"SI channel needs at least one diffuse tap, got {n_diffuse_taps}")
    total = 0.0 if math.isinf(antenna_separation_db) else db_to_linear(-antenna_separation_db)
    taps = np.zeros(n_diffuse_taps + 1, dtype=np.complex128)

    if math.isinf(k_factor_db) and k_factor_db > 0:
        taps[0] = math.sqrt(total)
    else:
        k = db_to_linear(k_factor_db)
        taps[0] = math.sqrt(total * k / (k + 1.0))
        profile = 10.0 ** (-decay_db_per_tap * np.arange(n_diffuse_taps) / 10.0)
        diffuse = complex_gaussian(make_rng(seed), n_diffuse_taps, 1.0) * np.sqrt(profile)
        diffuse *= math.sqrt(total / (k + 1.0) / np.sum(np.abs(diffuse) ** 2))
        taps[1:] = diffuse

    return SiChannel(taps=taps, k_factor_db=k_factor_db, total_gain_db=-antenna_separation_db)


def apply_channel(s: ComplexSignal, channel: SiChannel) -> ComplexSignal:
    return s.with_samples(_fir(channel.taps, s.samples))


def vm_weight(channel: SiChannel, cfg: TransceiverConfig) -> complex:
    """Overall gain of the RF cancellation path (attenuators and VM).

    Starts from the weight that best matches the coupling channel for the
    transmit waveform (the LOS tap plus what the diffuse taps project onto
    it) and shrinks it along the same phase until the expected SI
    suppression equals cfg.rf_cancellation_db.
    """
    if not channel.is_coupled:
        return 0j
    h = channel.taps
    params = OfdmParams(cfg.n_subcarriers, cfg.n_data_subcarriers, cfg.guard_samples, cfg.oversampling)
    acf = ofdm_autocorrelation(params, np.arange(h.size))
    # cov[i, j] = E[x(n-i) x*(n-j)]
    cov = linalg.toeplitz(np.conj(acf), acf)

    def residual_power(w: complex) -> float:
        r = h.copy()
        r[0] -= w
        return float(np.real(r @ cov @ np.conj(r)))

    total = residual_power(0j)
    w_opt = h[0] + (h[1:] @ cov[1:, 0]) / cov[0, 0]
    floor = residual_power(w_opt)
    target = db_to_linear(-cfg.rf_cancellation_db) * total

    if floor >= target or w_opt == 0:
        logger.warning("RF cancellation limited to %.2f dB by the diffuse channel",
                       10.0 * math.log10(total / floor) if floor > 0 else math.inf)
        return complex(w_opt)
    epsilon = math.sqrt((target - floor) / (np.real(cov[0, 0]) * abs(w_opt) ** 2))
    return complex(w_opt * (1.0 - epsilon))


def rf_cancellation(
    rx_in: ComplexSignal,
    pa_out: ComplexSignal,
    channel: SiChannel,
    cfg: TransceiverConfig,
    seed: SeedLike,
) -> ComplexSignal:
    """Subtracts the vector-modulator replica of the PA output at the RX input.

    The path is attenuator -> VM -> attenuator; only its overall complex gain
    matters for the signal, and the VM adds |a2|^2 (|a_vm|^2 F_vm - 1) p_th
    of noise at the combiner.

    Args:
        rx_in: Received signal at the antenna (SI, SOI and thermal noise).
        pa_out: PA output including TX noise and distortion.
        channel: SI channel the weight is matched to.
        cfg: Transceiver configuration.
        seed: Seed of the VM noise stream.

    Returns:
        ComplexSignal: Signal at the LNA input.
    """
    if len(rx_in) != len(pa_out):
        raise SignalError(f"RX input and PA output lengths differ: {len(rx_in)} vs {len(pa_out)}")

    w = vm_weight(channel, cfg)
    path_loss = db_to_linear(-cfg.vm_attenuation_in_db - cfg.vm_attenuation_out_db)
    if w != 0:
        logger.debug("VM gain realized: %.2f dB", 10.0 * math.log10(abs(w) ** 2 / path_loss))

    p_th = dbm_to_watts(thermal_floor_power(cfg.bandwidth_hz))
    a2 = db_to_linear(-cfg.vm_attenuation_out_db)
    vm_noise = a2 * (db_to_linear(cfg.vm_gain_db) * db_to_linear(cfg.vm_nf_db) - 1.0) * p_th

    y = rx_in.samples - w * pa_out.samples
    if vm_noise > 0 and len(rx_in):
        y = y + complex_gaussian(make_rng(seed), len(rx_in), vm_noise)
    return rx_in.with_samples(y)


# =============================================================================
# AGC AND ADC
# =============================================================================

def adc_full_scale_dbm(cfg: TransceiverConfig) -> float:
    """Full-scale power of the ADC: a sine spanning Vpp across the reference impedance."""
    v_rms = cfg.adc_vpp / (2.0 * math.sqrt(2.0))
    return watts_to_dbm(v_rms ** 2 / cfg.adc_impedance_ohm)


def quantize(samples: np.ndarray, bits: int, clip: float) -> np.ndarray:
    """Uniform mid-rise quantizer on each rail with clipping at +-clip."""
    step = 2.0 * clip / 2 ** bits
    top = clip - step / 2.0

    def rail(v):
        return np.clip(step * (np.floor(v / step) + 0.5), -top, top)

    return rail(samples.real) + 1j * rail(samples.imag)


def agc_adc(s: ComplexSignal, cfg: TransceiverConfig, gain_db: Optional[float] = None):
    """Scales a signal to the ADC operating point and quantizes it.

    The ideal AGC places the mean power PAPR below full scale. Each rail
    clips at the amplitude of the full-scale sine, sqrt(2 P_fs), so the
    envelope keeps PAPR + 3 dB of headroom and the rails PAPR + 6 dB.

    Args:
        s: ADC input.
        cfg: Transceiver configuration (ADC bits, Vpp, PAPR).
        gain_db: Held AGC gain; None measures the input and sets it.

    Returns:
        tuple: (quantized ComplexSignal, applied AGC gain in dB).
    """
    full_scale_w = dbm_to_watts(adc_full_scale_dbm(cfg))
    if gain_db is None:
        power = measure_power(s)
        if power == 0:
            raise SignalError("AGC cannot set a gain for a zero-power input")
        target_w = full_scale_w / db_to_linear(cfg.papr_db)
        gain_db = 10.0 * math.log10(target_w / power)

    scaled = s.samples * 10.0 ** (gain_db / 20.0)
    if cfg.quantization:
        scaled = quantize(scaled, cfg.adc_bits, math.sqrt(2.0 * full_scale_w))
    return s.with_samples(scaled), gain_db
