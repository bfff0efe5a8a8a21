"""Measurements on simulated waveforms and the twin-run SINR protocol.

SINR is measured with common random numbers: an evaluation frame is run
twice with identical seeds and held receiver gains, once with the SOI and
once without. After digital cancellation of both, their difference is the
SOI at the detector and the SOI-free run is the interference plus noise.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..config import TransceiverConfig
from ..errors import SignalError
from .canceller_tools import CancellerKind, cancel, estimate, estimate_delay
from .impairment_tools import SiChannel, apply_channel, vm_weight
from .signal_tools import ComplexSignal, linear_to_db, measure_power, watts_to_dbm
from .transceiver_tools import ChainGains, SeedSet, full_chain, tx_vga_gain_db

logger = logging.getLogger(__name__)

REFERENCE = "reference"
ALL_KINDS = tuple(CancellerKind)

# Fraction of the energy a tone input must hold in its peak bin
TONE_PURITY = 0.99

# Fewest channel realizations an ensemble K-factor is measured over
MIN_K_FACTOR_ENSEMBLE = 100


# =============================================================================
# SPECTRAL AND ENSEMBLE MEASUREMENTS
# =============================================================================

def _spectrum(s: ComplexSignal) -> np.ndarray:
    if len(s) == 0:
        raise SignalError("Cannot take the spectrum of an empty signal")
    return np.abs(np.fft.fft(s.samples) / len(s)) ** 2


def measure_tone_powers(s: ComplexSignal, frequencies_hz: Sequence[float]) -> List[float]:
    """Power in dBm of the FFT bins nearest to each frequency."""
    spectrum = _spectrum(s)
    n = len(s)
    return [watts_to_dbm(spectrum[int(round(f * n / s.sample_rate)) % n]) for f in frequencies_hz]


def measure_irr(before: ComplexSignal, after: ComplexSignal) -> float:
    """Image rejection ratio of a mixer from a single-tone test.

    Args:
        before: The tone fed to the mixer.
        after: Mixer output.

    Returns:
        float: Direct-bin over image-bin power in dB; +inf when the image is
        below the numerical floor.
    """
    if len(before) != len(after):
        raise SignalError(f"Tone records differ in length: {len(before)} vs {len(after)}")
    reference = _spectrum(before)
    k = int(np.argmax(reference))
    if reference[k] < TONE_PURITY * reference.sum() or k == 0:
        raise SignalError("IRR measurement needs a single off-DC complex tone as input")
    spectrum = _spectrum(after)
    direct, image = spectrum[k], spectrum[-k % len(after)]
    if image <= 1e-20 * direct:
        return math.inf
    return 10.0 * math.log10(direct / image)


def measure_k_factor(channels: Iterable[SiChannel]) -> float:
    """Ensemble K-factor: mean LOS power over mean diffuse power, in dB.

    Raises:
        SignalError: With fewer than MIN_K_FACTOR_ENSEMBLE realizations.
    """
    channels = list(channels)
    if len(channels) < MIN_K_FACTOR_ENSEMBLE:
        raise SignalError(
            f"K-factor needs at least {MIN_K_FACTOR_ENSEMBLE} channel realizations, got {len(channels)}"
        )
    los = np.mean([c.los_power for c in channels])
    diffuse = np.mean([c.diffuse_power for c in channels])
    if diffuse == 0:
        return math.inf
    return 10.0 * math.log10(los / diffuse)


def measure_si_suppression(pa_out: ComplexSignal, channel: SiChannel, cfg: TransceiverConfig) -> float:
    """SI power at the antenna over SI power after the RF canceller, in dB."""
    coupled = apply_channel(pa_out, channel)
    residual = coupled - pa_out.scaled(vm_weight(channel, cfg))
    return linear_to_db(measure_power(coupled) / measure_power(residual))


def measure_detector_noise(
    cfg: TransceiverConfig,
    tx_power_dbm: float,
    seeds: SeedSet,
    n_samples: Optional[int] = None,
) -> Tuple[float, ChainGains, float]:
    """Thermal noise at the detector of a linear chain, in watts.

    Runs one frame twice with different noise seeds and held gains; with a
    linear chain the difference carries only noise, at twice its power.

    Returns:
        tuple: (noise power, receiver gains, TX VGA gain in dB).
    """
    y_a, diag_a = full_chain(False, tx_power_dbm, cfg, seeds, n_samples)
    y_b, _ = full_chain(False, tx_power_dbm, cfg, seeds.with_noise(seeds.noise_seed + 1_000_003),
                        n_samples, gains=diag_a.gains)
    return measure_power(y_a - y_b) / 2.0, diag_a.gains, diag_a.tx_vga_db


# =============================================================================
# SINR
# =============================================================================

@dataclass(frozen=True)
class SinrRow:
    tx_power_dbm: float
    canceller: str
    sinr_db: float
    residual_dbm: float


@dataclass(frozen=True)
class SinrReport:
    """SINR per (transmit power, canceller) pair, in sweep order."""

    rows: Tuple[SinrRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def curve(self, canceller) -> List[float]:
        name = canceller.value if isinstance(canceller, CancellerKind) else canceller
        return [row.sinr_db for row in self.rows if row.canceller == name]

    def at(self, tx_power_dbm: float, canceller) -> SinrRow:
        name = canceller.value if isinstance(canceller, CancellerKind) else canceller
        for row in self.rows:
            if row.canceller == name and row.tx_power_dbm == tx_power_dbm:
                return row
        raise KeyError((tx_power_dbm, name))


def _twin_sinr(with_soi: ComplexSignal, without_soi: ComplexSignal) -> Tuple[float, float]:
    interference = measure_power(without_soi)
    soi = measure_power(with_soi - without_soi)
    return linear_to_db(soi / interference), watts_to_dbm(interference)


def reference_sinr(cfg: TransceiverConfig, tx_power_dbm: float, seeds: SeedSet) -> SinrRow:
    """SINR of the same transceiver with SI switched off and no digital canceller."""
    ref_cfg = cfg.replace(antenna_separation_db=math.inf)
    frame = seeds.next_frame()
    y_a, diag_a = full_chain(True, tx_power_dbm, ref_cfg, frame, cfg.evaluation_samples)
    y_b, _ = full_chain(False, tx_power_dbm, ref_cfg, frame, cfg.evaluation_samples, gains=diag_a.gains)
    sinr, residual = _twin_sinr(y_a, y_b)
    return SinrRow(tx_power_dbm, REFERENCE, sinr, residual)


def sinr_point(
    cfg: TransceiverConfig,
    tx_power_dbm: float,
    seeds: SeedSet,
    kinds: Sequence[CancellerKind] = ALL_KINDS,
    include_reference: bool = True,
) -> List[SinrRow]:
    """SINR of several cancellers at one transmit power.

    One calibration frame (no SOI, AGC free) and one twin evaluation frame
    (gains held from calibration) are shared by all canceller kinds.

    Args:
        cfg: Transceiver configuration.
        tx_power_dbm: PA output power.
        seeds: Seeds of the calibration frame; evaluation uses the next frame.
        kinds: Canceller kinds to evaluate.
        include_reference: Prepend the SI-free reference row.

    Returns:
        list: SinrRow per curve, reference first.
    """
    tx_vga_gain_db(tx_power_dbm, cfg)
    rows = [reference_sinr(cfg, tx_power_dbm, seeds)] if include_reference else []
    if not kinds:
        return rows

    y_cal, diag_cal = full_chain(False, tx_power_dbm, cfg, seeds, cfg.calibration_samples)
    frame = seeds.next_frame()
    y_a, diag_a = full_chain(True, tx_power_dbm, cfg, frame, cfg.evaluation_samples, gains=diag_cal.gains)
    y_b, diag_b = full_chain(False, tx_power_dbm, cfg, frame, cfg.evaluation_samples, gains=diag_cal.gains)

    x_cal = diag_cal.tx_samples
    delay = estimate_delay(x_cal, y_cal, cfg.canceller_memory, cfg.canceller_memory)
    for kind in kinds:
        kind = CancellerKind(kind)
        est = estimate(kind, x_cal, y_cal, cfg.canceller_memory, cfg.canceller_order, delay)
        c_a = cancel(est, diag_a.tx_samples, y_a)
        c_b = cancel(est, diag_b.tx_samples, y_b)
        sinr, residual = _twin_sinr(c_a, c_b)
        rows.append(SinrRow(tx_power_dbm, kind.value, sinr, residual))

    logger.info("Tx power:  {:6.2f} dBm  ".format(tx_power_dbm)
                + "  ".join("{}: {:6.2f} dB".format(r.canceller, r.sinr_db) for r in rows))
    return rows


def sinr_twin_run(cfg: TransceiverConfig, tx_power_dbm: float, kind: CancellerKind, seeds: SeedSet) -> float:
    """SINR in dB of one canceller kind at one transmit power."""
    (row,) = sinr_point(cfg, tx_power_dbm, seeds, kinds=(kind,), include_reference=False)
    return row.sinr_db
