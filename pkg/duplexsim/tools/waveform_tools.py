"""OFDM transmit waveform used for both the self-interference and the SOI."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import SignalError
from .signal_tools import ComplexSignal, make_rng, SeedLike

logger = logging.getLogger(__name__)

# Gray-mapped 16-QAM levels per rail, unit average symbol energy
_QAM16_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0]) / math.sqrt(10.0)


@dataclass(frozen=True)
class OfdmParams:
    """OFDM numerology of the simulated waveform."""

    n_subcarriers: int = 64
    n_data_subcarriers: int = 48
    guard_samples: int = 16
    oversampling: int = 4
    n_symbols: int = 1
    chip_rate_hz: float = 16e6

    def __post_init__(self):
        if self.n_data_subcarriers > self.n_subcarriers - 1:
            raise SignalError(
                f"{self.n_data_subcarriers} data subcarriers do not fit in "
                f"{self.n_subcarriers} bins with DC nulled"
            )
        if not 0 <= self.guard_samples < self.n_subcarriers:
            raise SignalError(f"Guard interval {self.guard_samples} must be below {self.n_subcarriers}")
        if self.n_data_subcarriers % 2 or self.n_data_subcarriers <= 0:
            raise SignalError("Data subcarriers are split symmetrically around DC and must be even")
        if self.oversampling < 1 or self.n_symbols < 0:
            raise SignalError("Oversampling must be >= 1 and symbol count >= 0")

    @property
    def fft_size(self) -> int:
        return self.n_subcarriers * self.oversampling

    @property
    def cp_length(self) -> int:
        return self.guard_samples * self.oversampling

    @property
    def symbol_length(self) -> int:
        return self.fft_size + self.cp_length

    @property
    def sample_rate(self) -> float:
        return self.chip_rate_hz * self.oversampling

    @property
    def data_bins(self) -> np.ndarray:
        """Signed subcarrier indices +-1..+-n_data/2 (DC and band edges null)."""
        half = self.n_data_subcarriers // 2
        return np.concatenate([np.arange(-half, 0), np.arange(1, half + 1)])

    def occupied_bandwidth_hz(self) -> float:
        return self.n_data_subcarriers * self.chip_rate_hz / self.n_subcarriers

    @classmethod
    def from_config(cls, cfg, n_samples: int) -> "OfdmParams":
        """Params from a TransceiverConfig with enough symbols for n_samples."""
        symbol_length = (cfg.n_subcarriers + cfg.guard_samples) * cfg.oversampling
        return cls(
            n_subcarriers=cfg.n_subcarriers,
            n_data_subcarriers=cfg.n_data_subcarriers,
            guard_samples=cfg.guard_samples,
            oversampling=cfg.oversampling,
            n_symbols=-(-n_samples // symbol_length),
            chip_rate_hz=cfg.chip_rate_hz,
        )


def qam16(bits: np.ndarray) -> np.ndarray:
    """Maps groups of 4 bits to Gray-coded unit-energy 16-QAM symbols."""
    bits = np.asarray(bits, dtype=np.int64).reshape(-1, 4)
    i_index = 2 * bits[:, 0] + bits[:, 1]
    q_index = 2 * bits[:, 2] + bits[:, 3]
    return _QAM16_LEVELS[i_index] + 1j * _QAM16_LEVELS[q_index]


def generate_ofdm(params: OfdmParams, seed: SeedLike) -> ComplexSignal:
    """Generates a cyclic-prefixed, oversampled 16-QAM OFDM waveform.

    Oversampling is a zero-padded inverse FFT of length
    n_subcarriers * oversampling per symbol.

    Args:
        params: OFDM numerology.
        seed: Integer seed or seed tuple for the data bits.

    Returns:
        ComplexSignal: Unit average power waveform of
        n_symbols * (n_subcarriers + guard) * oversampling samples.
    """
    if params.n_symbols == 0:
        return ComplexSignal(np.zeros(0, dtype=np.complex128), params.sample_rate)

    rng = make_rng(seed)
    bins = params.data_bins
    bits = rng.integers(0, 2, size=(params.n_symbols, bins.size * 4))
    symbols = qam16(bits).reshape(params.n_symbols, bins.size)

    grid = np.zeros((params.n_symbols, params.fft_size), dtype=np.complex128)
    grid[:, bins % params.fft_size] = symbols
    # numpy's ifft carries 1/N; rescale so the expected sample power is 1
    useful = np.fft.ifft(grid, axis=1) * params.fft_size / math.sqrt(bins.size)

    with_cp = np.concatenate([useful[:, params.fft_size - params.cp_length:], useful], axis=1)
    return ComplexSignal(with_cp.reshape(-1), params.sample_rate)


def ofdm_autocorrelation(params: OfdmParams, lags) -> np.ndarray:
    """Expected normalized autocorrelation E[x(n) x*(n-k)] of the waveform.

    Flat power over the occupied bins gives a sum of complex exponentials.
    """
    lags = np.asarray(lags)
    phases = 2j * np.pi * np.outer(lags, params.data_bins) / params.fft_size
    return np.mean(np.exp(phases), axis=1)


def papr(s: ComplexSignal) -> float:
    """Returns the peak-to-average power ratio of a signal in dB."""
    if len(s) == 0:
        raise SignalError("PAPR of an empty signal is undefined")
    inst = np.abs(s.samples) ** 2
    mean_power = inst.mean()
    if mean_power == 0:
        raise SignalError("PAPR of an all-zero signal is undefined")
    return 10.0 * math.log10(inst.max() / mean_power)
