"""Common shape of a runnable experiment."""

from dataclasses import dataclass
from typing import Callable, Sequence


@dataclass(frozen=True)
class Experiment:
    """A configured experiment.

    `run` returns a dict with a "status" key ("success" or "failure"); table
    experiments also return "columns" and "rows" for CSV output.
    """

    name: str
    description: str
    columns: Sequence[str]
    run: Callable[[], dict]
