"""End-to-end transceiver chain from the DAC to the ADC."""

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import optimize

from ..config import TransceiverConfig
from ..errors import ConfigError
from .impairment_tools import (
    SiChannel,
    adc_full_scale_dbm,
    agc_adc,
    apply_channel,
    apply_iq_imbalance,
    apply_ph,
    apply_stage,
    draw_si_channel,
    irr_to_response,
    pa_from_config,
    rf_cancellation,
    stage_noise_power,
)
from .signal_tools import (
    ComplexSignal,
    awgn,
    db_to_linear,
    dbm_to_watts,
    make_rng,
    measure_power,
    thermal_floor_power,
    watts_to_dbm,
)
from .waveform_tools import OfdmParams, generate_ofdm

logger = logging.getLogger(__name__)

# Device streams
CHANNEL_STREAM = 1
IQ_STREAM = 2

# Frame streams
TX_DATA_STREAM = 1
SOI_DATA_STREAM = 2

# Reference record of the PA drive search
DRIVE_RECORD_SAMPLES = 8192
DRIVE_RECORD_SEED = (0, 0)

# Noise streams
DAC_NOISE = 10
TX_MIXER_NOISE = 11
PA_NOISE = 12
RX_THERMAL_NOISE = 13
VM_NOISE = 14
LNA_NOISE = 15
RX_MIXER_NOISE = 16
RX_VGA_NOISE = 17


@dataclass(frozen=True)
class SeedSet:
    """Seeds of one simulated frame.

    `device` fixes the hardware (SI channel realization, IQ image phase);
    `frame` fixes the transmitted and received data; `noise` fixes every
    thermal noise record and follows `frame` unless given.
    """

    device: int
    frame: int
    noise: Optional[int] = None

    @property
    def noise_seed(self) -> int:
        return self.frame if self.noise is None else self.noise

    def device_stream(self, stream: int) -> Tuple[int, ...]:
        return (self.device, 0, stream)

    def frame_stream(self, stream: int) -> Tuple[int, ...]:
        return (self.device, 1, self.frame, stream)

    def noise_stream(self, stream: int) -> Tuple[int, ...]:
        return (self.device, 2, self.noise_seed, stream)

    def next_frame(self) -> "SeedSet":
        """Same device, fresh data and noise."""
        return SeedSet(self.device, self.frame + 1, None if self.noise is None else self.noise + 1)

    def with_noise(self, noise: int) -> "SeedSet":
        """Same device and data, different noise."""
        return SeedSet(self.device, self.frame, noise)


@dataclass(frozen=True)
class ChainGains:
    """Receiver gain settings, held between runs that must share them."""

    rx_vga_db: float
    agc_db: float


@dataclass
class ChainDiagnostics:
    """Per-run side outputs of full_chain."""

    tx_samples: ComplexSignal
    soi: Optional[ComplexSignal]
    channel: SiChannel
    tx_vga_db: float
    gains: ChainGains
    stage_powers_dbm: Dict[str, float] = field(default_factory=dict)

    def record(self, name: str, s: ComplexSignal):
        self.stage_powers_dbm[name] = watts_to_dbm(measure_power(s))


def _check_tx_vga(tx_power_dbm: float, gain: float, cfg: TransceiverConfig):
    if not cfg.tx_vga_min_db <= gain <= cfg.tx_vga_max_db:
        raise ConfigError(
            f"Transmit power {tx_power_dbm} dBm needs TX VGA gain {gain:.2f} dB, outside the "
            f"component range {cfg.tx_vga_min_db:g}-{cfg.tx_vga_max_db:g} dB"
        )


@functools.lru_cache(maxsize=8)
def _drive_record(params: OfdmParams) -> np.ndarray:
    s = generate_ofdm(params, DRIVE_RECORD_SEED).samples[:DRIVE_RECORD_SAMPLES]
    return s / math.sqrt(np.mean(np.abs(s) ** 2))


@functools.lru_cache(maxsize=256)
def pa_drive_dbm(tx_power_dbm: float, cfg: TransceiverConfig) -> float:
    """PA input power that delivers tx_power_dbm at the PA output.

    A linear PA needs tx - gain. A nonlinear PA loses some of its gain to
    compression on the OFDM waveform; the input that makes up for it is
    found by a secant search on a fixed unit-power OFDM record.

    Raises:
        ConfigError: When the PA cannot deliver the requested power.
    """
    nominal = tx_power_dbm - cfg.pa_gain_db
    if not cfg.pa_nonlinear:
        return nominal
    pa = pa_from_config(cfg)
    record = _drive_record(OfdmParams.from_config(cfg, DRIVE_RECORD_SAMPLES))

    def shortfall(p_in_dbm: float) -> float:
        s = ComplexSignal(record * math.sqrt(dbm_to_watts(p_in_dbm)), 1.0)
        return watts_to_dbm(measure_power(apply_ph(s, pa))) - tx_power_dbm

    try:
        drive = optimize.newton(shortfall, x0=nominal, x1=nominal + 0.1, tol=1e-6, maxiter=50)
    except RuntimeError:
        raise ConfigError(f"PA cannot deliver {tx_power_dbm} dBm on the OFDM waveform") from None
    if not math.isfinite(drive) or abs(shortfall(drive)) > 1e-3:
        raise ConfigError(f"PA cannot deliver {tx_power_dbm} dBm on the OFDM waveform")
    logger.debug("PA drive for %.2f dBm: %.3f dBm (compression %.3f dB)", tx_power_dbm, drive, drive - nominal)
    return float(drive)


def tx_vga_gain_db(tx_power_dbm: float, cfg: TransceiverConfig) -> float:
    """TX VGA gain that puts the requested power at the PA output.

    The gain includes the PA's compression on the OFDM waveform (see
    pa_drive_dbm).

    Raises:
        ConfigError: When the gain leaves the TX VGA range of the component table.
    """
    tx_drive = cfg.dac_output_dbm + cfg.tx_mixer_gain_db
    _check_tx_vga(tx_power_dbm, tx_power_dbm - cfg.pa_gain_db - tx_drive, cfg)
    gain = pa_drive_dbm(tx_power_dbm, cfg) - tx_drive
    _check_tx_vga(tx_power_dbm, gain, cfg)
    return gain


def _check_rx_vga(gain: float, cfg: TransceiverConfig):
    if not cfg.rx_vga_min_db <= gain <= cfg.rx_vga_max_db:
        raise ConfigError(
            f"AGC needs RX VGA gain {gain:.2f} dB, outside the component range "
            f"{cfg.rx_vga_min_db:g}-{cfg.rx_vga_max_db:g} dB"
        )


def image_phase(seeds: SeedSet) -> float:
    """Image coefficient phase of a device.

    The TX and RX IQ mixers run from one quadrature LO and share its
    imbalance, so both use this phase.
    """
    return float(make_rng(seeds.device_stream(IQ_STREAM)).uniform(0.0, 2.0 * math.pi))


def _mixer_response(cfg: TransceiverConfig, irr_db: float, seeds: SeedSet):
    return irr_to_response(irr_db if cfg.iq_imbalance else math.inf, image_phase(seeds))


def ofdm_frame(cfg: TransceiverConfig, n_samples: int, seed) -> ComplexSignal:
    """Unit-power OFDM record of exactly n_samples."""
    params = OfdmParams.from_config(cfg, n_samples)
    s = generate_ofdm(params, seed)
    return s.with_samples(s.samples[:n_samples])


def full_chain(
    soi_on: bool,
    tx_power_dbm: float,
    cfg: TransceiverConfig,
    seeds: SeedSet,
    n_samples: Optional[int] = None,
    gains: Optional[ChainGains] = None,
) -> Tuple[ComplexSignal, ChainDiagnostics]:
    """Simulates one frame through the full-duplex transceiver.

    DAC -> TX IQ mixer -> TX VGA -> PA -> SI channel -> (+ SOI, RX thermal)
    -> RF cancellation -> LNA -> RX IQ mixer -> RX VGA -> AGC/ADC.

    Args:
        soi_on: Add the signal of interest at the antenna.
        tx_power_dbm: PA output power.
        cfg: Transceiver configuration.
        seeds: Device, frame and noise seeds.
        n_samples: Frame length; defaults to cfg.evaluation_samples.
        gains: Held receiver gains; None lets the AGC set them on this frame.

    Returns:
        tuple: (ADC output, ChainDiagnostics).
    """
    n = cfg.evaluation_samples if n_samples is None else int(n_samples)
    if n < 1:
        raise ConfigError(f"Frame length must be positive, got {n}")
    p_th = dbm_to_watts(thermal_floor_power(cfg.bandwidth_hz))
    rate = cfg.sample_rate_hz

    # --- transmitter ---
    x = ofdm_frame(cfg, n, seeds.frame_stream(TX_DATA_STREAM))
    s = x.scaled(math.sqrt(dbm_to_watts(cfg.dac_output_dbm)))
    s = s + awgn(n, p_th, seeds.noise_stream(DAC_NOISE), rate)

    s = apply_iq_imbalance(s, _mixer_response(cfg, cfg.tx_irr_db, seeds))
    s = apply_stage(s, cfg.tx_mixer, seeds.noise_stream(TX_MIXER_NOISE), p_th)

    tx_vga = tx_vga_gain_db(tx_power_dbm, cfg)
    s = apply_stage(s, cfg.tx_vga(tx_vga), None, p_th)

    pa_out = apply_ph(s, pa_from_config(cfg))
    pa_out = pa_out + awgn(n, stage_noise_power(cfg.pa, p_th), seeds.noise_stream(PA_NOISE), rate)

    channel = draw_si_channel(cfg.si_k_factor_db, cfg.antenna_separation_db, cfg.si_diffuse_taps,
                              seeds.device_stream(CHANNEL_STREAM), cfg.si_tap_decay_db)
    diagnostics = ChainDiagnostics(x, None, channel, tx_vga, ChainGains(math.nan, math.nan))
    diagnostics.record("pa_out", pa_out)

    # --- antenna ---
    coupling = 0.0 if not cfg.si_enabled else db_to_linear(-cfg.antenna_separation_db)
    rx = apply_channel(pa_out, channel)
    rx = rx + awgn(n, (1.0 - coupling) * p_th, seeds.noise_stream(RX_THERMAL_NOISE), rate)
    if soi_on:
        soi = ofdm_frame(cfg, n, seeds.frame_stream(SOI_DATA_STREAM)).scaled(
            math.sqrt(dbm_to_watts(cfg.soi_power_dbm)))
        diagnostics.soi = soi
        rx = rx + soi
    diagnostics.record("rx_antenna", rx)

    if cfg.si_enabled:
        rx = rf_cancellation(rx, pa_out, channel, cfg, seeds.noise_stream(VM_NOISE))
        diagnostics.record("lna_in", rx)

    # --- receiver ---
    s = apply_stage(rx, cfg.lna, seeds.noise_stream(LNA_NOISE), p_th)
    s = apply_iq_imbalance(s, _mixer_response(cfg, cfg.rx_irr_db, seeds))
    s = apply_stage(s, cfg.rx_mixer, seeds.noise_stream(RX_MIXER_NOISE), p_th)
    diagnostics.record("rx_mixer_out", s)

    if gains is None:
        rx_vga = adc_full_scale_dbm(cfg) - cfg.papr_db - diagnostics.stage_powers_dbm["rx_mixer_out"]
    else:
        rx_vga = gains.rx_vga_db
    _check_rx_vga(rx_vga, cfg)
    s = apply_stage(s, cfg.rx_vga(rx_vga), seeds.noise_stream(RX_VGA_NOISE), p_th)
    diagnostics.record("adc_in", s)

    y, agc_db = agc_adc(s, cfg, None if gains is None else gains.agc_db)
    diagnostics.gains = ChainGains(rx_vga, agc_db)
    logger.debug("full_chain tx=%.1f dBm soi=%s gains=%s powers=%s", tx_power_dbm, soi_on,
                 diagnostics.gains, diagnostics.stage_powers_dbm)
    return y, diagnostics

