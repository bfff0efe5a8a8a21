"""Configuration cross-checks against the system and component tables."""

import logging
from typing import Sequence

from ..config import TransceiverConfig, print_config
from ..errors import DuplexSimError
from ..tools import (
    ComplexSignal,
    apply_ph,
    check_config,
    nl_power,
    pa_from_config,
    receiver_budget_summary,
    two_tone_test,
    tx_vga_gain_db,
)
from .experiment import Experiment

logger = logging.getLogger(__name__)

VALIDATE_COLUMNS = ("check", "passed", "detail")

# Two-tone input powers per tone for the PA intercept check
PA_CHECK_POWERS_DBM = (-10.0, -5.0, 0.0, 5.0)


def _pa_intercept_check(cfg: TransceiverConfig):
    if not cfg.pa_nonlinear:
        return ("pa_im3", True, "PA nonlinearity disabled")
    pa = pa_from_config(cfg)
    worst = 0.0
    for p_in in PA_CHECK_POWERS_DBM:
        measured = two_tone_test(lambda x: apply_ph(ComplexSignal(x, 1.0), pa).samples, p_in).im3_dbm
        expected = nl_power(p_in + cfg.pa_gain_db, p_in, cfg.pa_iip3_dbm, 3)
        worst = max(worst, abs(measured - expected))
    return ("pa_im3", worst <= 1.0, f"worst two-tone IM3 error {worst:.2f} dB")


def _tx_range_check(cfg: TransceiverConfig, tx_powers: Sequence[float]):
    try:
        gains = [tx_vga_gain_db(p, cfg) for p in tx_powers]
    except DuplexSimError as exc:
        return ("tx_grid", False, str(exc))
    return ("tx_grid", True, f"TX VGA gains {min(gains):.1f}-{max(gains):.1f} dB")


def run_validate(cfg: TransceiverConfig, tx_powers: Sequence[float], config_path=None) -> dict:
    """Runs every configuration check and prints the active configuration.

    Returns:
        dict: status ("success" when every check passes), failed check names
        and one (check, passed, detail) row per check.
    """
    print_config(cfg, config_path)
    summary = receiver_budget_summary(cfg)
    print("  Thermal floor: {:7.2f} dBm  Receiver NF: {:5.2f} dB  ADC SNR: {:5.2f} dB".format(
        summary["thermal_floor_dbm"], summary["receiver_nf_db"], summary["adc_snr_db"]))
    checks = check_config(cfg) + [_tx_range_check(cfg, tx_powers), _pa_intercept_check(cfg)]
    for name, passed, detail in checks:
        (logger.info if passed else logger.error)("%-14s %s  %s", name, "PASS" if passed else "FAIL", detail)
        print(f"  [{'PASS' if passed else 'FAIL'}] {name:<14} {detail}")

    failed = [name for name, passed, _ in checks if not passed]
    return {
        "status": "failure" if failed else "success",
        "failed": failed,
        "rows": [(name, "pass" if passed else "fail", detail) for name, passed, detail in checks],
    }


def create_validate_experiment(cfg: TransceiverConfig, tx_powers: Sequence[float], config_path=None) -> Experiment:
    """Creates and returns the configuration validation experiment."""
    return Experiment(
        name="validate",
        description="Sensitivity arithmetic, receiver NF, VGA ranges and PA intercept checks.",
        columns=VALIDATE_COLUMNS,
        run=lambda: run_validate(cfg, tx_powers, config_path),
    )
