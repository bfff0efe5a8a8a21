"""Detector power budget versus transmit power."""

import logging
from typing import Sequence

from ..config import TransceiverConfig
from ..tools import BUDGET_COMPONENTS, budget_sweep
from .experiment import Experiment

logger = logging.getLogger(__name__)

BUDGET_COLUMNS = ("tx_power_dbm",) + BUDGET_COMPONENTS


def run_budget_sweep(cfg: TransceiverConfig, tx_powers: Sequence[float]) -> dict:
    """Evaluates the analytic budget on a transmit power grid.

    Returns:
        dict: status, the PowerBudgetReport, its CSV rows and the transmit
        powers where the SI image is not the strongest residual.
    """
    report = budget_sweep(cfg, tx_powers)
    not_dominant = [row.tx_power_dbm for row in report if row.dominant() != "p_si_im"]
    if not_dominant:
        logger.warning("SI image is not the dominant residual at %s dBm", not_dominant)
    return {
        "status": "success",
        "report": report,
        "image_not_dominant_at": not_dominant,
        "rows": [(row.tx_power_dbm,) + tuple(row.components().values()) for row in report],
    }


def create_budget_sweep_experiment(cfg: TransceiverConfig, tx_powers: Sequence[float]) -> Experiment:
    """Creates and returns the power budget experiment."""
    return Experiment(
        name="budget-sweep",
        description="Component powers at the detector after linear digital cancellation.",
        columns=BUDGET_COLUMNS,
        run=lambda: run_budget_sweep(cfg, tx_powers),
    )
