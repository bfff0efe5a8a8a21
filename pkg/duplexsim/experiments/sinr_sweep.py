"""SINR versus transmit power for the reference and every canceller."""

import logging
from typing import Sequence

from ..config import TransceiverConfig
from ..tools import CancellerKind, SeedSet, SinrReport, sinr_point
from .experiment import Experiment

logger = logging.getLogger(__name__)

SINR_COLUMNS = ("tx_power_dbm", "canceller", "sinr_db", "residual_dbm")


def run_sinr_sweep(cfg: TransceiverConfig, tx_powers: Sequence[float], seed: int) -> dict:
    """Runs sinr_point over a transmit power grid.

    Args:
        cfg: Transceiver configuration.
        tx_powers: Sorted transmit powers in dBm.
        seed: Device seed; frame seeds are derived per grid point.

    Returns:
        dict: status, the SinrReport and its CSV rows.
    """
    rows = []
    for index, tx_power in enumerate(tx_powers):
        seeds = SeedSet(device=seed, frame=2 * index)
        rows.extend(sinr_point(cfg, tx_power, seeds, kinds=tuple(CancellerKind)))

    report = SinrReport(tuple(rows))
    logger.info("SINR sweep finished: %d rows", len(report))
    return {
        "status": "success",
        "report": report,
        "rows": [(r.tx_power_dbm, r.canceller, r.sinr_db, r.residual_dbm) for r in report],
    }


def create_sinr_sweep_experiment(cfg: TransceiverConfig, tx_powers: Sequence[float], seed: int) -> Experiment:
    """Creates and returns the SINR sweep experiment."""
    return Experiment(
        name="sinr-sweep",
        description="Twin-run SINR of the SI-free reference and the four digital cancellers.",
        columns=SINR_COLUMNS,
        run=lambda: run_sinr_sweep(cfg, tx_powers, seed),
    )
