"""Complex least-squares solver shared by the digital cancellers."""

import logging
from typing import Optional

import numpy as np
from scipy import linalg

from ..errors import EstimationError, RankDeficientError

logger = logging.getLogger(__name__)


def numerical_rank(r_diag: np.ndarray, shape, rcond: Optional[float] = None) -> int:
    """Rank from the diagonal of a column-pivoted R factor."""
    magnitudes = np.abs(r_diag)
    if magnitudes.size == 0 or magnitudes[0] == 0:
        return 0
    if rcond is None:
        rcond = max(shape) * np.finfo(float).eps
    return int(np.count_nonzero(magnitudes > rcond * magnitudes[0]))


def ls_solve(a: np.ndarray, y: np.ndarray, ridge: float = 0.0, rcond: Optional[float] = None) -> np.ndarray:
    """Solves min ||a theta - y|| with a column-pivoted QR factorization.

    Matrices are dense row-major numpy arrays, one row per observation.

    Args:
        a: Complex matrix with at least as many rows as columns.
        y: Complex observation vector, one entry per row of `a`.
        ridge: Tikhonov parameter; 0 solves plain least squares.
        rcond: Relative threshold on |R_ii| for the rank decision.

    Returns:
        np.ndarray: Coefficient vector of length cols(a).

    Raises:
        RankDeficientError: When the numerical rank is below cols(a).
    """
    a = np.asarray(a, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    if a.ndim != 2:
        raise EstimationError(f"LS matrix must be 2-D, got shape {a.shape}")
    rows, cols = a.shape
    if y.size != rows:
        raise EstimationError(f"Observation length {y.size} does not match {rows} matrix rows")
    if ridge < 0:
        raise EstimationError(f"Ridge parameter must be non-negative, got {ridge}")
    if ridge > 0:
        a = np.vstack([a, np.sqrt(ridge) * np.eye(cols)])
        y = np.concatenate([y, np.zeros(cols, dtype=np.complex128)])
        rows += cols
    if rows < cols:
        raise EstimationError(f"Underdetermined system: {rows} rows < {cols} columns")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(y))):
        raise EstimationError("LS system contains non-finite entries")

    q, r, perm = linalg.qr(a, mode="economic", pivoting=True)
    rank = numerical_rank(np.diag(r), a.shape, rcond)
    if rank < cols:
        raise RankDeficientError(rank, cols)

    solution = np.empty(cols, dtype=np.complex128)
    solution[perm] = linalg.solve_triangular(r, q.conj().T @ y)
    logger.debug("LS solve: %d x %d, |R| span %.3g", rows, cols,
                 abs(r[0, 0]) / abs(r[-1, -1]))
    return solution

