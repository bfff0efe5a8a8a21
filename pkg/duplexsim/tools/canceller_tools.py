"""Digital self-interference cancellers built on convolution matrices.

Four cancellers regenerate the SI from the known digital transmit samples:

- linear: x only
- widely-linear: x and conj(x)
- nonlinear-ph: odd-order basis functions |x|^(p-1) x
- joint: widely-linear block plus the PH blocks without p = 1

Every matrix keeps only the rows n = M-1 .. N-1 where the full filter
history is available; the observation is trimmed to the same rows.
"""

import enum
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy import linalg

from ..errors import EstimationError
from .impairment_tools import basis_function
from .linalg_tools import ls_solve
from .signal_tools import ComplexSignal

logger = logging.getLogger(__name__)

SignalLike = Union[ComplexSignal, np.ndarray]

# Calibration rows per unknown coefficient
MIN_ROWS_PER_COLUMN = 10


class CancellerKind(str, enum.Enum):
    LINEAR = "linear"
    WIDELY_LINEAR = "widely-linear"
    NONLINEAR_PH = "nonlinear-ph"
    JOINT = "joint"

    @property
    def uses_conjugate(self) -> bool:
        return self in (CancellerKind.WIDELY_LINEAR, CancellerKind.JOINT)

    @property
    def uses_nonlinear(self) -> bool:
        return self in (CancellerKind.NONLINEAR_PH, CancellerKind.JOINT)


def coefficient_count(kind: CancellerKind, memory: int, order: int) -> int:
    """Number of LS unknowns of a canceller."""
    n_branches = (order + 1) // 2
    if kind is CancellerKind.LINEAR:
        return memory
    if kind is CancellerKind.WIDELY_LINEAR:
        return 2 * memory
    if kind is CancellerKind.NONLINEAR_PH:
        return memory * n_branches
    return 2 * memory + memory * (n_branches - 1)


def _check_order(kind: CancellerKind, order: int):
    if order < 1 or order % 2 == 0:
        raise EstimationError(f"Nonlinearity order must be odd and positive, got {order}")
    if kind is CancellerKind.JOINT and order < 3:
        raise EstimationError("Joint canceller needs order >= 3; use the widely-linear canceller instead")


@dataclass(frozen=True, eq=False)
class CancellerEstimate:
    """Calibrated coefficients of one canceller.

    Coefficients are stacked as h1, then h2 (conjugate kinds), then the
    p >= 3 branches in increasing order (nonlinear kinds); the PH canceller
    keeps its p = 1 branch in the h1 slot.
    """

    kind: CancellerKind
    memory: int
    order: int
    coefficients: np.ndarray
    delay: int = 0

    def __post_init__(self):
        kind = CancellerKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.memory < 1:
            raise EstimationError(f"Canceller memory must be >= 1, got {self.memory}")
        if self.delay < 0:
            raise EstimationError(f"Alignment delay must be >= 0, got {self.delay}")
        _check_order(kind, self.order)
        coefficients = np.asarray(self.coefficients, dtype=np.complex128).reshape(-1)
        expected = coefficient_count(kind, self.memory, self.order)
        if coefficients.size != expected:
            raise EstimationError(
                f"{kind.value} canceller with M={self.memory}, P={self.order} needs "
                f"{expected} coefficients, got {coefficients.size}"
            )
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def h1(self) -> np.ndarray:
        return self.coefficients[:self.memory]

    @property
    def h2(self) -> np.ndarray:
        if not self.kind.uses_conjugate:
            return np.zeros(self.memory, dtype=np.complex128)
        return self.coefficients[self.memory:2 * self.memory]

    def branch(self, p: int) -> np.ndarray:
        """Taps of the odd-order branch p (p = 1 is h1)."""
        if p == 1:
            return self.h1
        if p % 2 == 0 or p > self.order or not self.kind.uses_nonlinear:
            return np.zeros(self.memory, dtype=np.complex128)
        start = (2 if self.kind.uses_conjugate else 1) * self.memory + (p - 3) // 2 * self.memory
        return self.coefficients[start:start + self.memory]


def _samples(x: SignalLike) -> np.ndarray:
    if isinstance(x, ComplexSignal):
        return x.samples
    return np.asarray(x, dtype=np.complex128).reshape(-1)


# =============================================================================
# CONVOLUTION MATRICES
# =============================================================================

def build_linear_matrix(x: SignalLike, memory: int) -> np.ndarray:
    """Toeplitz matrix with rows [x(n), x(n-1), ..., x(n-M+1)], n = M-1 .. N-1.

    Args:
        x: Input signal.
        memory: Number of taps M.

    Returns:
        np.ndarray: (N - M + 1) x M complex matrix.
    """
    x = _samples(x)
    if memory < 1:
        raise EstimationError(f"Canceller memory must be >= 1, got {memory}")
    if x.size < memory:
        raise EstimationError(f"Signal of {x.size} samples is shorter than {memory} taps")
    return linalg.toeplitz(x[memory - 1:], x[memory - 1::-1])


def build_augmented_matrix(x: SignalLike, memory: int) -> np.ndarray:
    """[X | X*] for widely-linear estimation."""
    x = _samples(x)
    return np.hstack([build_linear_matrix(x, memory), build_linear_matrix(np.conj(x), memory)])


def build_ph_matrix(x: SignalLike, order: int, memory: int, include_linear: bool = True) -> np.ndarray:
    """One Toeplitz block per odd basis function psi_p, p <= order.

    Args:
        x: Input signal.
        order: Highest odd order P.
        memory: Taps per branch M.
        include_linear: Keep the p = 1 block.

    Returns:
        np.ndarray: Horizontally stacked blocks in increasing p.
    """
    if order < 1 or order % 2 == 0:
        raise EstimationError(f"PH order must be odd and positive, got {order}")
    x = _samples(x)
    first = 1 if include_linear else 3
    blocks = [build_linear_matrix(basis_function(x, p), memory) for p in range(first, order + 1, 2)]
    if not blocks:
        return np.zeros((max(x.size - memory + 1, 0), 0), dtype=np.complex128)
    return np.hstack(blocks)


def build_joint_matrix(x: SignalLike, order: int, memory: int) -> np.ndarray:
    """[X | X* | psi_3 block | ... | psi_P block]."""
    _check_order(CancellerKind.JOINT, order)
    x = _samples(x)
    return np.hstack([build_augmented_matrix(x, memory), build_ph_matrix(x, order, memory, include_linear=False)])


def build_matrix(kind: CancellerKind, x: SignalLike, memory: int, order: int) -> np.ndarray:
    """Convolution matrix of a canceller kind."""
    kind = CancellerKind(kind)
    if kind is CancellerKind.LINEAR:
        return build_linear_matrix(x, memory)
    if kind is CancellerKind.WIDELY_LINEAR:
        return build_augmented_matrix(x, memory)
    if kind is CancellerKind.NONLINEAR_PH:
        return build_ph_matrix(x, order, memory)
    return build_joint_matrix(x, order, memory)


# =============================================================================
# ESTIMATION AND CANCELLATION
# =============================================================================

def estimate_delay(x: SignalLike, y: SignalLike, max_lag: int, memory: int = 1) -> int:
    """Bulk delay d in [0, max_lag] that best aligns y(n) with x(n - d).

    Each candidate lag gets a linear least-squares fit with `memory` taps and
    the lag with the lowest mean residual power wins, the smallest lag on a
    tie. After RF cancellation the strongest tap of the response need not be
    its first, so the cross-correlation peak is not a usable delay.

    Args:
        x: Known transmit samples.
        y: Received samples, same length.
        max_lag: Largest delay searched.
        memory: Taps of the trial fit.

    Returns:
        int: Selected delay.
    """
    x, y = _samples(x), _samples(y)
    if x.size != y.size:
        raise EstimationError(f"Transmit and received lengths differ: {x.size} vs {y.size}")
    if max_lag < 0 or max_lag + memory > x.size:
        raise EstimationError(f"Delay search range {max_lag} does not fit {x.size} samples")

    residuals = np.empty(max_lag + 1)
    for lag in range(max_lag + 1):
        x_lag, y_lag = _align(x, y, lag)
        a = build_linear_matrix(x_lag, memory)
        observed = y_lag[memory - 1:]
        taps, *_ = linalg.lstsq(a, observed)
        residuals[lag] = np.mean(np.abs(observed - a @ taps) ** 2)
    delay = int(np.argmin(residuals))
    logger.debug("Delay search over %d lags picked %d", max_lag + 1, delay)
    return delay


def _align(x: np.ndarray, y: np.ndarray, delay: int):
    if x.size != y.size:
        raise EstimationError(f"Transmit and received lengths differ: {x.size} vs {y.size}")
    if delay == 0:
        return x, y
    return x[:x.size - delay], y[delay:]


def estimate(
    kind: CancellerKind,
    x_cal: SignalLike,
    y_cal: SignalLike,
    memory: int,
    order: int,
    delay: int = 0,
    ridge: float = 0.0,
) -> CancellerEstimate:
    """Calibrates a canceller by least squares.

    Args:
        kind: Canceller kind.
        x_cal: Known transmit samples of the calibration frame.
        y_cal: ADC output of the same frame with no SOI present.
        memory: Taps per response M.
        order: Highest odd nonlinearity order P.
        delay: Bulk delay of y_cal relative to x_cal.
        ridge: Optional Tikhonov parameter passed to the solver.

    Returns:
        CancellerEstimate: Partitioned coefficient vector.
    """
    kind = CancellerKind(kind)
    _check_order(kind, order)
    x, y = _align(_samples(x_cal), _samples(y_cal), delay)
    cols = coefficient_count(kind, memory, order)
    rows = x.size - memory + 1
    if rows < MIN_ROWS_PER_COLUMN * cols:
        raise EstimationError(
            f"{kind.value} calibration needs at least {MIN_ROWS_PER_COLUMN * cols} usable samples, got {max(rows, 0)}"
        )
    a = build_matrix(kind, x, memory, order)
    theta = ls_solve(a, y[memory - 1:], ridge=ridge)
    logger.debug("%s canceller calibrated on %d rows x %d columns", kind.value, *a.shape)
    return CancellerEstimate(kind, memory, order, theta, delay)


def regenerate(est: CancellerEstimate, x: SignalLike) -> np.ndarray:
    """SI replica matrix @ coefficients over the valid rows of x."""
    return build_matrix(est.kind, x, est.memory, est.order) @ est.coefficients


def cancel(est: CancellerEstimate, x: SignalLike, y: SignalLike) -> ComplexSignal:
    """Subtracts the regenerated SI from y.

    Args:
        est: Calibrated canceller.
        x: Known transmit samples aligned with y.
        y: ADC output.

    Returns:
        ComplexSignal: y - y_canc over the valid rows; the first
        delay + M - 1 samples are dropped.
    """
    sample_rate = y.sample_rate if isinstance(y, ComplexSignal) else 1.0
    x, y = _align(_samples(x), _samples(y), est.delay)
    if x.size < est.memory:
        raise EstimationError(f"Signal of {x.size} samples is shorter than {est.memory} taps")
    residual = y[est.memory - 1:] - regenerate(est, x)
    return ComplexSignal(residual, sample_rate)


# =============================================================================
# COEFFICIENT FILES
# =============================================================================

def save_estimate(est: CancellerEstimate, path) -> Path:
    """Writes one 're im' coefficient per line under a kind/M/P/delay header."""
    path = Path(path)
    lines = [f"# kind={est.kind.value} M={est.memory} P={est.order} delay={est.delay}"]
    lines += [f"{c.real:.17g} {c.imag:.17g}" for c in est.coefficients]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_estimate(path) -> CancellerEstimate:
    """Reads a coefficient file written by save_estimate."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("#"):
        raise EstimationError(f"{path}: missing coefficient file header")
    try:
        header = dict(item.split("=", 1) for item in text[0].lstrip("#").split())
        values = [complex(float(re), float(im)) for re, im in (line.split() for line in text[1:] if line.strip())]
        return CancellerEstimate(
            kind=CancellerKind(header["kind"]),
            memory=int(header["M"]),
            order=int(header["P"]),
            coefficients=np.array(values, dtype=np.complex128),
            delay=int(header.get("delay", 0)),
        )
    except (KeyError, ValueError) as exc:
        if isinstance(exc, EstimationError):
            raise
        raise EstimationError(f"{path}: malformed coefficient file ({exc})") from None
