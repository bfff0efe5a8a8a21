"""duplexsim - waveform simulator of a direct-conversion full-duplex transceiver.

Analog impairments from DAC to ADC, four digital self-interference
cancellers and an analytic detector power budget.
"""

from .config import TransceiverConfig, load_config, print_config
from .errors import (
    BudgetError,
    ConfigError,
    DuplexSimError,
    EstimationError,
    RankDeficientError,
    SignalError,
)

__version__ = "0.1.0"

__all__ = [
    "TransceiverConfig",
    "load_config",
    "print_config",
    "DuplexSimError",
    "SignalError",
    "ConfigError",
    "EstimationError",
    "BudgetError",
    "RankDeficientError",
]
