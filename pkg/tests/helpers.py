"""Signal builders shared by several test modules."""

import math

import numpy as np

from duplexsim.tools import ComplexSignal


def random_signal(rng, length, power=1.0, sample_rate=1.0):
    samples = math.sqrt(power / 2.0) * (rng.standard_normal(length) + 1j * rng.standard_normal(length))
    return ComplexSignal(samples, sample_rate)


def tone(bin_index, n_fft, power=1.0, sample_rate=1.0):
    n = np.arange(n_fft)
    return ComplexSignal(math.sqrt(power) * np.exp(2j * np.pi * bin_index * n / n_fft), sample_rate)
