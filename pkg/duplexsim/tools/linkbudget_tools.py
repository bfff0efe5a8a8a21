"""Analytic link budget of the full-duplex receiver.

Closed-form power levels at the detector input (the ADC) for each residual
component after linear digital cancellation: linear SI, SI image, RX and TX
thermal noise, TX and RX nonlinear distortion, quantization noise and SOI.
Powers are in dBm unless a name ends in _w.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional, Tuple

from ..config import StageSpec, TransceiverConfig
from ..errors import BudgetError, ConfigError
from .impairment_tools import adc_full_scale_dbm, cascade_noise_factor
from .signal_tools import db_to_linear, dbm_to_watts, linear_to_db, thermal_floor_power, watts_to_dbm
from .transceiver_tools import tx_vga_gain_db

logger = logging.getLogger(__name__)

BUDGET_COMPONENTS = ("p_si", "p_si_im", "p_n_rx", "p_n_tx", "p_nl_tx", "p_nl_rx", "p_q", "p_soi")


def nl_power(p_out: float, p_in: float, iipn: float, n: int) -> float:
    """Power of an nth-order distortion product, P_out - (n-1)(IIPn - P_in).

    Args:
        p_out: Fundamental output power.
        p_in: Input power.
        iipn: Input-referred nth-order intercept point.
        n: Nonlinearity order, at least 2.

    Returns:
        float: Distortion product power in dBm.
    """
    if n < 2:
        raise BudgetError(f"Nonlinearity order must be >= 2, got {n}")
    return p_out - (n - 1) * (iipn - p_in)


def adc_snr(bits: int, papr_db: float) -> float:
    """ADC signal-to-quantization-noise ratio, 6.02 b + 4.76 - PAPR."""
    if bits < 1:
        raise BudgetError(f"ADC needs at least one bit, got {bits}")
    return 6.02 * bits + 4.76 - papr_db


def quantization_floor(p_ad: float, bits: int, papr_db: float) -> float:
    """Quantization noise power for an ADC input power p_ad."""
    return p_ad - adc_snr(bits, papr_db)


def receiver_noise_factor(cfg: TransceiverConfig, rx_vga_gain_db: float = 0.0) -> float:
    """Friis noise factor of LNA, RX mixer and RX VGA."""
    return cascade_noise_factor([cfg.lna, cfg.rx_mixer, cfg.rx_vga(rx_vga_gain_db)])


def _noise_terms(cfg: TransceiverConfig, tx_vga_gain_db: float, rx_vga_gain_db: float, agc_gain_db: float):
    """Linear-unit factors of the detector noise equation."""
    factors = {
        "k_bb": db_to_linear(rx_vga_gain_db + agc_gain_db),
        "k_lna": db_to_linear(cfg.lna_gain_db),
        "g1_rx": db_to_linear(cfg.rx_mixer_gain_db),
        "f_rx": receiver_noise_factor(cfg, rx_vga_gain_db),
        "a2": db_to_linear(-cfg.vm_attenuation_out_db) if cfg.si_enabled else 0.0,
        "a_vm": db_to_linear(cfg.vm_gain_db),
        "f_vm": db_to_linear(cfg.vm_nf_db),
        "a_ant": db_to_linear(-cfg.antenna_separation_db) if cfg.si_enabled else 0.0,
        "a_rf": db_to_linear(-cfg.rf_cancellation_db),
        "k_pa": db_to_linear(cfg.pa_gain_db),
        "f_pa": db_to_linear(cfg.pa_nf_db),
        "f_tx": db_to_linear(cfg.tx_mixer_nf_db),
        "g1_tx": db_to_linear(cfg.tx_mixer_gain_db),
        "k_vga": db_to_linear(tx_vga_gain_db),
        "p_th": dbm_to_watts(thermal_floor_power(cfg.bandwidth_hz)),
    }
    for name in ("f_rx", "f_vm", "f_pa", "f_tx"):
        if factors[name] < 1.0:
            raise BudgetError(f"Noise factor {name} = {factors[name]:.4g} is below 1")
    return factors


def thermal_noise_powers(
    cfg: TransceiverConfig,
    tx_vga_gain_db: float,
    rx_vga_gain_db: float = 0.0,
    agc_gain_db: float = 0.0,
) -> Tuple[float, float]:
    """RX- and TX-induced thermal noise at the detector, in watts.

    All quantities are power ratios. With k = k_bb k_lna g1_rx:

        p_n_rx = k F p_th
        p_n_tx = k [a2 (a_vm F_vm - 1) - a_ant + a_ant a_rf k_pa (F_pa - 1 + F_tx g1_tx k_vga)] p_th

    Args:
        cfg: Transceiver configuration.
        tx_vga_gain_db: TX VGA gain.
        rx_vga_gain_db: RX VGA gain.
        agc_gain_db: Residual AGC gain in front of the quantizer.

    Returns:
        tuple: (p_n_rx, p_n_tx) in watts.

    Raises:
        BudgetError: For a noise factor below 1 or a negative TX term.
    """
    t = _noise_terms(cfg, tx_vga_gain_db, rx_vga_gain_db, agc_gain_db)
    gain = t["k_bb"] * t["k_lna"] * t["g1_rx"]
    p_n_rx = gain * t["f_rx"] * t["p_th"]
    bracket = (
        t["a2"] * (t["a_vm"] * t["f_vm"] - 1.0)
        - t["a_ant"]
        + t["a_ant"] * t["a_rf"] * t["k_pa"] * (t["f_pa"] - 1.0 + t["f_tx"] * t["g1_tx"] * t["k_vga"])
    )
    if bracket < 0:
        raise BudgetError(
            f"TX noise term is negative ({bracket:.3g} p_th): antenna coupling exceeds the "
            "cancellation-path and transmitter noise, outside the validity of the noise equation"
        )
    return p_n_rx, gain * bracket * t["p_th"]


def detector_noise_power(
    cfg: TransceiverConfig,
    tx_vga_gain_db: float,
    rx_vga_gain_db: float = 0.0,
    agc_gain_db: float = 0.0,
) -> float:
    """Total thermal noise at the detector in watts, as one expression."""
    t = _noise_terms(cfg, tx_vga_gain_db, rx_vga_gain_db, agc_gain_db)
    return (
        t["k_bb"] * t["k_lna"] * t["g1_rx"]
        * (
            t["f_rx"]
            + t["a2"] * (t["a_vm"] * t["f_vm"] - 1.0)
            - t["a_ant"]
            + t["a_ant"] * t["a_rf"] * t["k_pa"] * (t["f_pa"] - 1.0 + t["f_tx"] * t["g1_tx"] * t["k_vga"])
        )
        * t["p_th"]
    )


def sensitivity_dbm(cfg: TransceiverConfig) -> float:
    """Thermal floor + receiver NF + SNR requirement."""
    return thermal_floor_power(cfg.bandwidth_hz) + cfg.receiver_nf_db + cfg.snr_requirement_db


def check_config(cfg: TransceiverConfig) -> List[Tuple[str, bool, str]]:
    """Runs the system and component cross-checks.

    Returns:
        list: (check name, passed, detail) tuples.
    """
    results = []
    expected = sensitivity_dbm(cfg)
    results.append((
        "sensitivity",
        abs(expected - cfg.sensitivity_dbm) <= 0.1,
        f"floor + NF + SNR = {expected:.2f} dBm, table {cfg.sensitivity_dbm:.2f} dBm",
    ))
    cascade_nf = linear_to_db(receiver_noise_factor(cfg))
    results.append((
        "receiver_nf",
        abs(cascade_nf - cfg.receiver_nf_db) <= 0.3,
        f"Friis cascade {cascade_nf:.2f} dB, table {cfg.receiver_nf_db:.2f} dB",
    ))
    reference_snr = cfg.soi_power_dbm - (thermal_floor_power(cfg.bandwidth_hz) + cfg.receiver_nf_db)
    results.append((
        "soi_margin",
        reference_snr >= cfg.snr_requirement_db,
        f"SI-free SNR {reference_snr:.2f} dB vs requirement {cfg.snr_requirement_db:.2f} dB",
    ))
    for name, low, high in (("tx_vga_range", cfg.tx_vga_min_db, cfg.tx_vga_max_db),
                            ("rx_vga_range", cfg.rx_vga_min_db, cfg.rx_vga_max_db)):
        results.append((name, 0.0 <= low <= high, f"{low:g}-{high:g} dB"))
    return results


@dataclass(frozen=True)
class BudgetRow:
    """Component powers at the detector for one transmit power."""

    tx_power_dbm: float
    p_si: float
    p_si_im: float
    p_n_rx: float
    p_n_tx: float
    p_nl_tx: float
    p_nl_rx: float
    p_q: float
    p_soi: float
    rx_vga_db: float

    def components(self) -> dict:
        values = asdict(self)
        return {name: values[name] for name in BUDGET_COMPONENTS}

    def dominant(self) -> str:
        """Strongest residual component other than the SOI."""
        residual = {k: v for k, v in self.components().items() if k != "p_soi"}
        return max(residual, key=residual.get)


@dataclass(frozen=True)
class PowerBudgetReport:
    rows: Tuple[BudgetRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def column(self, name: str) -> List[float]:
        return [getattr(row, name) for row in self.rows]


def _power_sum_dbm(powers_dbm: Iterable[float]) -> float:
    return watts_to_dbm(sum(dbm_to_watts(p) for p in powers_dbm if math.isfinite(p)))


def _stage_distortion(spec: StageSpec, p_in: float) -> List[float]:
    """IM2 and IM3 at a stage output for an input power."""
    p_out = p_in + spec.gain_db
    products = []
    if spec.iip2_dbm is not None and math.isfinite(spec.iip2_dbm):
        products.append(nl_power(p_out, p_in, spec.iip2_dbm, 2))
    if spec.iip3_dbm is not None and math.isfinite(spec.iip3_dbm):
        products.append(nl_power(p_out, p_in, spec.iip3_dbm, 3))
    return products


def budget_point(cfg: TransceiverConfig, tx_power_dbm: float) -> BudgetRow:
    """Component powers at the detector for one transmit power.

    The SI at the LNA input is tx - separation - RF cancellation; an ideal
    AGC sets the RX VGA so the total ADC input sits PAPR below full scale.
    Linear SI after digital cancellation is pinned below the thermal floor
    by cfg.linear_cancellation_margin_db.
    """
    if not cfg.si_enabled:
        raise ConfigError("Budget sweep needs a finite antenna separation")
    tx_vga = tx_vga_gain_db(tx_power_dbm, cfg)
    front_gain = cfg.lna_gain_db + cfg.rx_mixer_gain_db

    si_lna = tx_power_dbm - cfg.antenna_separation_db - cfg.rf_cancellation_db
    noise_lna = watts_to_dbm(sum(thermal_noise_powers(cfg, tx_vga))) - front_gain
    total_lna = _power_sum_dbm([si_lna, cfg.soi_power_dbm, noise_lna])

    p_ad = adc_full_scale_dbm(cfg) - cfg.papr_db
    rx_vga = p_ad - (total_lna + front_gain)
    if not cfg.rx_vga_min_db <= rx_vga <= cfg.rx_vga_max_db:
        raise ConfigError(
            f"AGC needs RX VGA gain {rx_vga:.2f} dB, outside the component range "
            f"{cfg.rx_vga_min_db:g}-{cfg.rx_vga_max_db:g} dB"
        )
    gain = front_gain + rx_vga

    p_n_rx_w, p_n_tx_w = thermal_noise_powers(cfg, tx_vga, rx_vga)
    p_si = watts_to_dbm(p_n_rx_w + p_n_tx_w) - cfg.linear_cancellation_margin_db

    # TX and RX images share the LO imbalance and add in amplitude
    image_ratio = 0.0
    if cfg.iq_imbalance:
        image_ratio = (math.sqrt(db_to_linear(-cfg.tx_irr_db)) + math.sqrt(db_to_linear(-cfg.rx_irr_db))) ** 2
    p_si_im = si_lna + gain + linear_to_db(image_ratio)

    # Distortion follows the intercept law of the small-signal output at the actual drive
    pa_in = cfg.dac_output_dbm + cfg.tx_mixer_gain_db + tx_vga
    p_nl_tx = -math.inf
    if cfg.pa_nonlinear:
        p_nl_tx = nl_power(pa_in + cfg.pa_gain_db, pa_in, cfg.pa_iip3_dbm, 3) + (si_lna - tx_power_dbm) + gain

    rx_products = []
    p_in = total_lna
    stages = [(cfg.lna, cfg.rx_mixer_gain_db + rx_vga), (cfg.rx_mixer, rx_vga), (cfg.rx_vga(rx_vga), 0.0)]
    for spec, downstream in stages:
        rx_products += [p + downstream for p in _stage_distortion(spec, p_in)]
        p_in += spec.gain_db
    p_nl_rx = _power_sum_dbm(rx_products)

    row = BudgetRow(
        tx_power_dbm=tx_power_dbm,
        p_si=p_si,
        p_si_im=p_si_im,
        p_n_rx=watts_to_dbm(p_n_rx_w),
        p_n_tx=watts_to_dbm(p_n_tx_w),
        p_nl_tx=p_nl_tx,
        p_nl_rx=p_nl_rx,
        p_q=quantization_floor(p_ad, cfg.adc_bits, cfg.papr_db),
        p_soi=cfg.soi_power_dbm + gain,
        rx_vga_db=rx_vga,
    )
    logger.info("Tx power:  {:6.2f} dBm  RX VGA: {:6.2f} dB  dominant: {}".format(
        tx_power_dbm, rx_vga, row.dominant()))
    return row


def budget_sweep(cfg: TransceiverConfig, tx_powers: Iterable[float]) -> PowerBudgetReport:
    """Evaluates budget_point over a transmit power grid.

    Args:
        cfg: Transceiver configuration.
        tx_powers: Transmit powers in dBm.

    Returns:
        PowerBudgetReport: One row per transmit power, in grid order.
    """
    powers = list(tx_powers)
    if not powers:
        raise BudgetError("Budget sweep needs at least one transmit power")
    return PowerBudgetReport(tuple(budget_point(cfg, p) for p in powers))


def receiver_budget_summary(cfg: TransceiverConfig, tx_power_dbm: Optional[float] = None) -> dict:
    """Headline numbers for the validate report."""
    floor = thermal_floor_power(cfg.bandwidth_hz)
    summary = {
        "thermal_floor_dbm": floor,
        "receiver_nf_db": linear_to_db(receiver_noise_factor(cfg)),
        "sensitivity_dbm": sensitivity_dbm(cfg),
        "adc_snr_db": adc_snr(cfg.adc_bits, cfg.papr_db),
        "adc_full_scale_dbm": adc_full_scale_dbm(cfg),
    }
    if tx_power_dbm is not None:
        summary["tx_vga_db"] = tx_vga_gain_db(tx_power_dbm, cfg)
    return summary
