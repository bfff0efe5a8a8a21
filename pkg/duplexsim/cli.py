"""Command line entry point: sinr-sweep, budget-sweep and validate modes."""

import argparse
import csv
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple

from .config import load_config
from .errors import ConfigError, DuplexSimError
from .experiments import create_budget_sweep_experiment, create_sinr_sweep_experiment, create_validate_experiment

logger = logging.getLogger(__name__)

MODES = ("sinr-sweep", "budget-sweep", "validate")
CSV_VERSION = 1


@dataclass(frozen=True)
class RunSpec:
    """One command line invocation."""

    mode: str
    tx_powers: Tuple[float, ...]
    seed: int = 1
    config_path: Optional[Path] = None
    out: Optional[Path] = None
    calibration_samples: Optional[int] = None
    evaluation_samples: Optional[int] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"Unknown mode '{self.mode}', expected one of {', '.join(MODES)}")
        if not self.tx_powers:
            raise ConfigError("Transmit power grid is empty")
        if list(self.tx_powers) != sorted(self.tx_powers):
            raise ConfigError("Transmit power grid must be sorted")

    @property
    def output_path(self) -> Optional[Path]:
        if self.out is not None or self.mode == "validate":
            return self.out
        return Path(f"{self.mode}.csv")


def tx_grid(tx_min: float, tx_max: float, tx_step: float) -> Tuple[float, ...]:
    """Inclusive transmit power grid tx_min, tx_min + step, ..., <= tx_max."""
    if not tx_step > 0:
        raise ConfigError(f"Transmit power step must be positive, got {tx_step}")
    if tx_max < tx_min:
        raise ConfigError(f"Transmit power range is empty: {tx_min} > {tx_max}")
    count = int(math.floor((tx_max - tx_min) / tx_step + 1e-9)) + 1
    return tuple(round(tx_min + i * tx_step, 9) for i in range(count))


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_csv(path: Path, mode: str, columns: Sequence[str], rows) -> Path:
    """Writes rows atomically under a versioned header comment."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", newline="", encoding="utf-8") as handle:
            handle.write(f"# duplexsim {mode} v{CSV_VERSION}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format(v) for v in row])
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()
    return path


def run(spec: RunSpec) -> int:
    """Executes a RunSpec.

    Args:
        spec: Mode, grid, seed, config and output paths.

    Returns:
        int: Process exit status, 0 on success.
    """
    try:
        cfg = load_config(spec.config_path)
        overrides = {}
        if spec.calibration_samples is not None:
            overrides["calibration_samples"] = spec.calibration_samples
        if spec.evaluation_samples is not None:
            overrides["evaluation_samples"] = spec.evaluation_samples
        if overrides:
            cfg = cfg.replace(**overrides)

        if spec.mode == "sinr-sweep":
            experiment = create_sinr_sweep_experiment(cfg, spec.tx_powers, spec.seed)
        elif spec.mode == "budget-sweep":
            experiment = create_budget_sweep_experiment(cfg, spec.tx_powers)
        else:
            experiment = create_validate_experiment(cfg, spec.tx_powers, spec.config_path)

        logger.info("Running %s over %d transmit powers", experiment.name, len(spec.tx_powers))
        result = experiment.run()
    except DuplexSimError as exc:
        logger.error("%s failed: %s", spec.mode, exc)
        print(f"duplexsim: error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, RuntimeError) as exc:
        logger.exception("%s failed in a numerical routine", spec.mode)
        print(f"duplexsim: error: numerical failure: {exc}", file=sys.stderr)
        return 1

    if result["status"] != "success":
        print(f"duplexsim: {spec.mode} failed checks: {', '.join(result.get('failed', []))}", file=sys.stderr)
        return 1

    out = spec.output_path
    if out is not None:
        write_csv(out, spec.mode, experiment.columns, result["rows"])
        logger.info("Wrote %d rows to %s", len(result["rows"]), out)
    return 0


def parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="duplexsim", description="Full-duplex transceiver simulator")
    parser.add_argument("--mode", choices=MODES, default="validate", help="Experiment to run.")
    parser.add_argument("--config", type=Path, help="key = value config file (default: DUPLEXSIM_CONFIG, "
                                                    "then the shipped default).")
    parser.add_argument("--tx-min", type=float, default=0.0, help="Lowest transmit power in dBm.")
    parser.add_argument("--tx-max", type=float, default=25.0, help="Highest transmit power in dBm.")
    parser.add_argument("--tx-step", type=float, default=2.5, help="Transmit power step in dB.")
    parser.add_argument("--seed", type=int, default=1, help="Device seed of the simulated transceiver.")
    parser.add_argument("--out", type=Path, help="CSV output path (default: <mode>.csv for sweeps).")
    parser.add_argument("--calibration-samples", type=int, help="Override calibration frame length.")
    parser.add_argument("--evaluation-samples", type=int, help="Override evaluation frame length.")
    parser.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="Logging verbosity.")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        spec = RunSpec(
            mode=args.mode,
            tx_powers=tx_grid(args.tx_min, args.tx_max, args.tx_step),
            seed=args.seed,
            config_path=args.config,
            out=args.out,
            calibration_samples=args.calibration_samples,
            evaluation_samples=args.evaluation_samples,
        )
    except DuplexSimError as exc:
        print(f"duplexsim: error: {exc}", file=sys.stderr)
        return 1
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
