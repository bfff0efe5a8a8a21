"""Configuration for duplexsim transceiver runs.

A run is fully described by one TransceiverConfig. Values are read from a flat
``key = value`` file (the shipped default holds the baseline
transceiver) in this order:

- explicit path passed to load_config()
- DUPLEXSIM_CONFIG environment variable
- data/default_config.env next to this module

Keys missing from a file keep the defaults below.
"""

import dataclasses
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import dotenv_values

from .errors import ConfigError

DEFAULT_CONFIG_PATH = Path(__file__).parent / "data" / "default_config.env"
CONFIG_ENV_VAR = "DUPLEXSIM_CONFIG"

# Thermal noise density at room temperature
NOISE_DENSITY_DBM_HZ = -174.0


@dataclass(frozen=True)
class StageSpec:
    """Gain, noise figure and intercept points of one analog stage.

    An intercept point of None means the stage is linear in that order.
    """

    gain_db: float
    nf_db: float = 0.0
    iip2_dbm: Optional[float] = None
    iip3_dbm: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.gain_db) and math.isfinite(self.nf_db)):
            raise ConfigError(f"Stage gain and NF must be finite, got {self.gain_db} / {self.nf_db}")
        if self.nf_db < 0:
            raise ConfigError(f"Noise figure {self.nf_db} dB is below 0 dB")

    def linear(self) -> "StageSpec":
        return dataclasses.replace(self, iip2_dbm=None, iip3_dbm=None)

    def with_gain(self, gain_db: float) -> "StageSpec":
        return dataclasses.replace(self, gain_db=gain_db)


@dataclass(frozen=True)
class TransceiverConfig:
    """System, component and waveform parameters plus simulator defaults."""

    # System level
    snr_requirement_db: float = 10.0
    bandwidth_hz: float = 12.5e6
    receiver_nf_db: float = 4.1
    sensitivity_dbm: float = -88.9
    soi_power_dbm: float = -83.9
    antenna_separation_db: float = 40.0
    rf_cancellation_db: float = 30.0
    vm_attenuation_in_db: float = 15.0
    vm_attenuation_out_db: float = 15.0
    tx_irr_db: float = 30.0
    rx_irr_db: float = 30.0
    adc_bits: int = 12
    adc_vpp: float = 4.5
    papr_db: float = 10.0

    # Components
    tx_mixer_gain_db: float = 6.0
    tx_mixer_nf_db: float = 10.0
    tx_vga_min_db: float = 0.0
    tx_vga_max_db: float = 30.0
    pa_gain_db: float = 27.0
    pa_iip3_dbm: float = 13.0
    pa_nf_db: float = 5.0
    vm_gain_db: float = -10.0
    vm_nf_db: float = 20.0
    lna_gain_db: float = 25.0
    lna_iip2_dbm: Optional[float] = 43.0
    lna_iip3_dbm: Optional[float] = -9.0
    lna_nf_db: float = 4.1
    rx_mixer_gain_db: float = 6.0
    rx_mixer_iip2_dbm: Optional[float] = 42.0
    rx_mixer_iip3_dbm: Optional[float] = 15.0
    rx_mixer_nf_db: float = 4.0
    rx_vga_min_db: float = 0.0
    rx_vga_max_db: float = 69.0
    rx_vga_iip2_dbm: Optional[float] = 43.0
    rx_vga_iip3_dbm: Optional[float] = 14.0
    rx_vga_nf_db: float = 4.0

    # Waveform and SI channel
    n_subcarriers: int = 64
    n_data_subcarriers: int = 48
    guard_samples: int = 16
    oversampling: int = 4
    chip_rate_hz: float = 16e6
    si_k_factor_db: float = 35.8

    # Simulator defaults
    dac_output_dbm: float = -33.0
    pa_order: int = 5
    pa_memory_taps: tuple = (1.0, -0.05, 0.01)
    pa_fifth_order_backoff_db: float = 30.0
    pa_fifth_order_reference_dbm: float = 25.0
    si_diffuse_taps: int = 7
    si_tap_decay_db: float = 3.0
    adc_impedance_ohm: float = 50.0
    linear_cancellation_margin_db: float = 3.0
    canceller_memory: int = 10
    canceller_order: int = 5
    calibration_samples: int = 10000
    evaluation_samples: int = 20000
    pa_nonlinear: bool = True
    rx_nonlinear: bool = True
    iq_imbalance: bool = True
    quantization: bool = True

    @property
    def sample_rate_hz(self) -> float:
        return self.chip_rate_hz * self.oversampling

    @property
    def si_enabled(self) -> bool:
        return math.isfinite(self.antenna_separation_db)

    # --- stage views ---

    @property
    def tx_mixer(self) -> StageSpec:
        return StageSpec(self.tx_mixer_gain_db, self.tx_mixer_nf_db)

    def tx_vga(self, gain_db: float) -> StageSpec:
        # The TX mixer noise figure covers the VGA as well
        return StageSpec(gain_db, 0.0)

    @property
    def pa(self) -> StageSpec:
        return StageSpec(self.pa_gain_db, self.pa_nf_db, None, self.pa_iip3_dbm)

    @property
    def vm(self) -> StageSpec:
        return StageSpec(self.vm_gain_db, self.vm_nf_db)

    @property
    def lna(self) -> StageSpec:
        return self._rx_stage(StageSpec(self.lna_gain_db, self.lna_nf_db, self.lna_iip2_dbm, self.lna_iip3_dbm))

    @property
    def rx_mixer(self) -> StageSpec:
        return self._rx_stage(StageSpec(self.rx_mixer_gain_db, self.rx_mixer_nf_db,
                                        self.rx_mixer_iip2_dbm, self.rx_mixer_iip3_dbm))

    def rx_vga(self, gain_db: float) -> StageSpec:
        return self._rx_stage(StageSpec(gain_db, self.rx_vga_nf_db, self.rx_vga_iip2_dbm, self.rx_vga_iip3_dbm))

    def _rx_stage(self, spec: StageSpec) -> StageSpec:
        return spec if self.rx_nonlinear else spec.linear()

    def replace(self, **changes) -> "TransceiverConfig":
        return dataclasses.replace(self, **changes)


_OPTIONAL_KEYS = {f.name for f in dataclasses.fields(TransceiverConfig) if f.name.endswith("_dbm") and "iip" in f.name}
_FIELD_TYPES = {f.name: f.default for f in dataclasses.fields(TransceiverConfig)}


def _parse_value(key: str, raw: Optional[str]):
    default = _FIELD_TYPES[key]
    text = (raw or "").strip()
    if key in _OPTIONAL_KEYS and text.lower() in ("none", ""):
        return None
    try:
        if isinstance(default, bool):
            if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return text.lower() in ("true", "1", "yes")
        if isinstance(default, int):
            return int(float(text))
        if isinstance(default, tuple):
            return tuple(float(v) for v in text.split(",") if v.strip())
        return float(text)
    except ValueError:
        raise ConfigError(f"Config key '{key}' has invalid value '{raw}'") from None


def resolve_config_path(path=None) -> Path:
    """Returns the config file to load following the documented lookup order."""
    if path is not None:
        return Path(path)
    env_path = os.environ.get(CONFIG_ENV_VAR)
    if env_path:
        return Path(env_path)
    return DEFAULT_CONFIG_PATH


def load_config(path=None) -> TransceiverConfig:
    """Loads a TransceiverConfig from a key = value file.

    Args:
        path: Config file path. None falls back to DUPLEXSIM_CONFIG, then the
            shipped default.

    Returns:
        TransceiverConfig: The parsed configuration.
    """
    config_path = resolve_config_path(path)
    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")

    values = dotenv_values(config_path, interpolate=False)
    unknown = sorted(set(values) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"Unknown config keys in {config_path}: {', '.join(unknown)}")

    parsed = {key: _parse_value(key, raw) for key, raw in values.items()}
    return TransceiverConfig(**parsed)


def print_config(cfg: TransceiverConfig, path=None):
    """Prints the active transceiver configuration."""
    source = str(resolve_config_path(path))
    print(f"""
╔══════════════════════════════════════════════════════════════╗
║                duplexsim Transceiver Configuration           ║
╠══════════════════════════════════════════════════════════════╣
║  Source: {source[-51:]:<51} ║
║  Bandwidth: {cfg.bandwidth_hz / 1e6:>8.3f} MHz    Sample rate: {cfg.sample_rate_hz / 1e6:>8.3f} MHz ║
║  Antenna separation: {cfg.antenna_separation_db:>6.1f} dB  RF cancellation: {cfg.rf_cancellation_db:>6.1f} dB ║
║  IRR TX/RX: {cfg.tx_irr_db:>5.1f}/{cfg.rx_irr_db:<5.1f} dB   ADC: {cfg.adc_bits:>2d} bits, {cfg.adc_vpp:>4.2f} Vpp         ║
║  PA: {cfg.pa_gain_db:>5.1f} dB gain, IIP3 {cfg.pa_iip3_dbm:>6.1f} dBm, order {cfg.pa_order:<2d}              ║
║  SOI power: {cfg.soi_power_dbm:>7.2f} dBm   SI K-factor: {cfg.si_k_factor_db:>6.2f} dB         ║
╚══════════════════════════════════════════════════════════════╝
""")
