"""duplexsim experiments - configured runs behind the command line modes."""

from .experiment import Experiment
from .sinr_sweep import SINR_COLUMNS, create_sinr_sweep_experiment, run_sinr_sweep
from .budget_sweep import BUDGET_COLUMNS, create_budget_sweep_experiment, run_budget_sweep
from .validate import VALIDATE_COLUMNS, create_validate_experiment, run_validate

__all__ = [
    "Experiment",
    "SINR_COLUMNS",
    "BUDGET_COLUMNS",
    "VALIDATE_COLUMNS",
    "create_sinr_sweep_experiment",
    "create_budget_sweep_experiment",
    "create_validate_experiment",
    "run_sinr_sweep",
    "run_budget_sweep",
    "run_validate",
]
