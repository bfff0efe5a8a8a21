"""Exceptions raised by duplexsim."""


class DuplexSimError(ValueError):
    """Base class for every error the simulator raises on bad input."""


class SignalError(DuplexSimError):
    """Invalid signal shape or an undefined measurement."""


class ConfigError(DuplexSimError):
    """A configuration value or a consistency check failed."""


class EstimationError(DuplexSimError):
    """Canceller estimate and input data do not match."""


class BudgetError(DuplexSimError):
    """Link-budget evaluation left the range where its equations hold."""


class RankDeficientError(DuplexSimError):
    """Least-squares matrix has lower numerical rank than columns."""

    def __init__(self, rank: int, cols: int):
        self.rank = rank
        self.cols = cols
        super().__init__(f"Rank-deficient system: numerical rank {rank} < {cols} columns")
