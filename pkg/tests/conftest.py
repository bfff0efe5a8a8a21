"""Shared fixtures for the duplexsim test suite."""

import math

import pytest

from duplexsim.config import DEFAULT_CONFIG_PATH, load_config
from duplexsim.tools import make_rng


@pytest.fixture(autouse=True)
def _no_config_override(monkeypatch):
    monkeypatch.delenv("DUPLEXSIM_CONFIG", raising=False)


@pytest.fixture(scope="session")
def cfg():
    """Default configuration as shipped."""
    return load_config(DEFAULT_CONFIG_PATH)


@pytest.fixture(scope="session")
def linear_cfg(cfg):
    """Nonlinearity-free chain with a pure LOS coupling channel."""
    return cfg.replace(
        pa_nonlinear=False,
        rx_nonlinear=False,
        quantization=False,
        si_k_factor_db=math.inf,
    )


@pytest.fixture
def rng():
    return make_rng(20240611)
