"""Complex baseband containers, power conversions and seeded noise."""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ..config import NOISE_DENSITY_DBM_HZ
from ..errors import SignalError

logger = logging.getLogger(__name__)

SeedLike = Union[int, Sequence[int]]


@dataclass(frozen=True, eq=False)
class ComplexSignal:
    """Complex baseband samples with their sample rate.

    Power convention: mean(|sample|^2) is the signal power in watts.
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "samples", samples)
        if not self.sample_rate > 0:
            raise SignalError(f"Sample rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return self.samples.size

    def with_samples(self, samples) -> "ComplexSignal":
        return ComplexSignal(samples, self.sample_rate)

    def __add__(self, other: "ComplexSignal") -> "ComplexSignal":
        _check_same_length(self, other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "ComplexSignal") -> "ComplexSignal":
        _check_same_length(self, other)
        return self.with_samples(self.samples - other.samples)

    def scaled(self, factor) -> "ComplexSignal":
        return self.with_samples(self.samples * factor)


def _check_same_length(a: ComplexSignal, b: ComplexSignal):
    if len(a) != len(b):
        raise SignalError(f"Signal lengths differ: {len(a)} vs {len(b)}")


def dbm_to_watts(p_dbm):
    """Converts dBm to watts."""
    result = 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)
    return float(result) if np.ndim(result) == 0 else result


def watts_to_dbm(p_w):
    """Converts watts to dBm. Zero power maps to -inf."""
    with np.errstate(divide="ignore"):
        result = 10.0 * np.log10(np.asarray(p_w, dtype=float)) + 30.0
    return float(result) if np.ndim(result) == 0 else result


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value) if value > 0 else -math.inf


def measure_power(s: ComplexSignal) -> float:
    """Returns the mean power of a signal in watts.

    Args:
        s: Signal to measure, must be nonempty.

    Returns:
        float: mean(|sample|^2).
    """
    if len(s) == 0:
        raise SignalError("Cannot measure the power of an empty signal")
    return float(np.mean(np.abs(s.samples) ** 2))


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Returns a counter-based Philox generator for a seed or seed tuple.

    Streams for different stages are separated by appending a stream id to
    the seed tuple; equal tuples always give bit-identical draws.
    """
    entropy = [int(seed)] if np.ndim(seed) == 0 else [int(v) for v in seed]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def complex_gaussian(rng: np.random.Generator, length: int, power: float) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples of the given power."""
    scale = math.sqrt(power / 2.0)
    return scale * (rng.standard_normal(length) + 1j * rng.standard_normal(length))


def awgn(length: int, power: float, seed: SeedLike, sample_rate: float = 1.0) -> ComplexSignal:
    """Generates seeded circularly-symmetric white Gaussian noise.

    Args:
        length: Number of samples.
        power: Noise power in watts.
        seed: Integer seed or seed tuple.
        sample_rate: Sample rate of the returned signal in Hz.

    Returns:
        ComplexSignal: Noise record whose expected power is `power`.
    """
    if power < 0:
        raise SignalError(f"Noise power must be non-negative, got {power}")
    if length < 0:
        raise SignalError(f"Noise length must be non-negative, got {length}")
    if power == 0 or length == 0:
        return ComplexSignal(np.zeros(length, dtype=np.complex128), sample_rate)
    return ComplexSignal(complex_gaussian(make_rng(seed), length, power), sample_rate)


def thermal_floor_power(bandwidth_hz: float) -> float:
    """Returns the thermal noise floor in dBm for a bandwidth.

    Args:
        bandwidth_hz: Noise bandwidth in Hz.

    Returns:
        float: -174 dBm/Hz integrated over the bandwidth.
    """
    if not bandwidth_hz > 0:
        raise SignalError(f"Bandwidth must be positive, got {bandwidth_hz}")
    return NOISE_DENSITY_DBM_HZ + 10.0 * math.log10(bandwidth_hz)
