"""Log-domain carrier for long matrix products.

A power Aⁿ is kept as ``Q · diag(e^ℓ) · C`` with ``Q`` unitary, ``ℓ`` a non-increasing
vector of log-grades and ``C`` a matrix with unit rows. Products are split with
Gaussian elimination with complete pivoting whose row and column scales are carried
in logarithms, followed by a QR step that restores the unitary frame (the same
re-orthogonalisation used for Lyapunov spectra). Singular values far below the
largest one therefore survive squaring, which a single rescaled matrix cannot do.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from powerlim.errors import InternalError
from powerlim.utils import graded_log_norm, log_abs, safe_log, unit_phase

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class GradedPower:
    frame: np.ndarray
    log_grades: np.ndarray
    coframe: np.ndarray
    exponent: int

    @property
    def size(self) -> int:
        return int(self.frame.shape[0])

    @property
    def is_zero(self) -> bool:
        return not bool(np.any(np.isfinite(self.log_grades)))

    def scale_and_base(self) -> tuple[float, np.ndarray]:
        """(log_scale, base) with ‖base‖ = 1 and Aⁿ = e^{log_scale}·base."""
        if self.is_zero:
            return float("-inf"), np.zeros((self.size, self.size), dtype=np.complex128)
        top = float(self.log_grades[0])
        weighted = np.exp(self.log_grades - top)[:, None] * self.coframe
        norm = float(scipy.linalg.svdvals(weighted)[0])
        return top + float(np.log(norm)), (self.frame @ weighted) / norm

    def to_matrix(self) -> np.ndarray:
        return self.frame @ (np.exp(self.log_grades)[:, None] * self.coframe)

    def log_norm_of(self, vector: np.ndarray) -> float:
        return graded_log_norm(self.log_grades, self.coframe @ vector)

    def times(self, matrix: np.ndarray) -> GradedPower:
        """Right multiplication by an ordinary matrix of moderate norm."""
        return _finalize(self.frame, self.log_grades, self.coframe @ matrix, self.exponent)

    def singular_values(self, grade_gap: float) -> tuple[np.ndarray, np.ndarray]:
        return graded_svd(self.log_grades, self.coframe, grade_gap)


def _finalize(
    frame: np.ndarray, log_grades: np.ndarray, coframe: np.ndarray, exponent: int
) -> GradedPower:
    norms = np.linalg.norm(coframe, axis=1)
    grades = np.asarray(log_grades, dtype=float) + safe_log(norms)
    safe_norms = np.where(norms > 0, norms, 1.0)
    rows = np.where((norms > 0)[:, None], coframe / safe_norms[:, None], 0.0)
    order = np.argsort(-grades, kind="stable")
    return GradedPower(
        frame=_frozen(frame[:, order]),
        log_grades=_frozen(grades[order]),
        coframe=_frozen(rows[order]),
        exponent=exponent,
    )


def graded_from_matrix(matrix: np.ndarray) -> GradedPower:
    m = matrix.shape[0]
    return _finalize(np.eye(m, dtype=np.complex128), np.zeros(m), np.array(matrix), 1)


def graded_ldu(
    row_log: np.ndarray, middle: np.ndarray, col_log: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Complete-pivoting LDU of ``diag(e^r)·M·diag(e^c)`` without leaving the log domain.

    Returns ``(rows, lower, log_pivots, phases, upper, cols)`` such that
    ``G[rows][:, cols] = lower · diag(e^{log_pivots}·phases) · upper`` with
    ``|lower|, |upper| ≤ 1`` entrywise.
    """
    m = middle.shape[0]
    work = np.array(middle, dtype=np.complex128)
    row_log = np.array(row_log, dtype=float)
    col_log = np.array(col_log, dtype=float)
    rows = np.arange(m)
    cols = np.arange(m)
    lower = np.eye(m, dtype=np.complex128)
    upper = np.eye(m, dtype=np.complex128)
    log_pivots = np.full(m, -np.inf)
    phases = np.ones(m, dtype=np.complex128)
    work[~np.isfinite(row_log), :] = 0.0
    work[:, ~np.isfinite(col_log)] = 0.0

    for k in range(m):
        scaled = log_abs(work[k:, k:]) + row_log[k:, None] + col_log[None, k:]
        if not np.any(np.isfinite(scaled)):
            # remaining Schur complement is exactly zero
            break
        p, q = np.unravel_index(int(np.argmax(scaled)), scaled.shape)
        p += k
        q += k
        if p != k:
            work[[k, p], :] = work[[p, k], :]
            row_log[[k, p]] = row_log[[p, k]]
            rows[[k, p]] = rows[[p, k]]
            lower[[k, p], :k] = lower[[p, k], :k]
        if q != k:
            work[:, [k, q]] = work[:, [q, k]]
            col_log[[k, q]] = col_log[[q, k]]
            cols[[k, q]] = cols[[q, k]]
            upper[:k, [k, q]] = upper[:k, [q, k]]

        pivot = work[k, k]
        log_pivot = float(np.log(abs(pivot)))
        log_pivots[k] = row_log[k] + col_log[k] + log_pivot
        phases[k] = pivot / abs(pivot)
        if k == m - 1:
            break

        column = work[k + 1 :, k]
        row = work[k, k + 1 :]
        pivot_phase = np.conj(phases[k])
        lower[k + 1 :, k] = (
            np.exp(row_log[k + 1 :] - row_log[k] + log_abs(column) - log_pivot)
            * unit_phase(column)
            * pivot_phase
        )
        upper[k, k + 1 :] = (
            np.exp(col_log[k + 1 :] - col_log[k] + log_abs(row) - log_pivot)
            * unit_phase(row)
            * pivot_phase
        )

        # Schur complement; each column is rescaled so stored entries stay at most 1
        block = work[k + 1 :, k + 1 :]
        log_block = log_abs(block)
        log_term = log_abs(column)[:, None] + log_abs(row)[None, :] - log_pivot
        term_phase = unit_phase(column)[:, None] * unit_phase(row)[None, :] * pivot_phase
        log_column = np.max(np.maximum(log_block, log_term), axis=0)
        shift = np.where(np.isfinite(log_column), log_column, 0.0)
        work[k + 1 :, k + 1 :] = unit_phase(block) * np.exp(log_block - shift) - term_phase * np.exp(
            log_term - shift
        )
        col_log[k + 1 :] += shift

    return rows, lower, log_pivots, phases, upper, cols


def _regrade(triangular: np.ndarray, log_pivots: np.ndarray) -> np.ndarray:
    """R·diag(e^δ) = diag(e^δ)·R̃; returns R̃ (rows with δ = −∞ are dropped to zero)."""
    finite = np.isfinite(log_pivots)
    anchor = np.where(finite, log_pivots, 0.0)
    target = np.where(finite, log_pivots, -np.inf)
    # only j ≥ i is formed; below the diagonal e^{δ_j − δ_i} leaves double range
    exponent = np.triu(target[None, :] - anchor[:, None])
    exponent[~finite, :] = -np.inf
    return np.triu(triangular) * np.exp(exponent)


def graded_product(left: GradedPower, right: GradedPower) -> GradedPower:
    middle = left.coframe @ right.frame
    rows, lower, log_pivots, phases, upper, cols = graded_ldu(
        left.log_grades, middle, right.log_grades
    )
    m = left.size
    permuted_lower = np.zeros((m, m), dtype=np.complex128)
    permuted_lower[rows, :] = lower
    permuted_upper = np.zeros((m, m), dtype=np.complex128)
    permuted_upper[:, cols] = upper

    frame_step, triangular = scipy.linalg.qr(permuted_lower)
    coframe = _regrade(triangular, log_pivots) @ (phases[:, None] * permuted_upper) @ right.coframe
    if not np.all(np.isfinite(coframe)):
        raise InternalError("graded product produced non-finite factors")
    return _finalize(left.frame @ frame_step, log_pivots, coframe, left.exponent + right.exponent)


def graded_square(power: GradedPower) -> GradedPower:
    return graded_product(power, power)


def graded_power(matrix: np.ndarray, n: int) -> GradedPower:
    """Aⁿ for any n ≥ 1 by binary powering."""
    if n < 1:
        raise ValueError("n must be at least 1")
    square = graded_from_matrix(matrix)
    result: GradedPower | None = None
    remaining = n
    while True:
        if remaining & 1:
            result = square if result is None else graded_product(result, square)
        remaining >>= 1
        if not remaining:
            break
        square = graded_square(square)
    assert result is not None
    return result


def graded_svd(
    log_grades: np.ndarray, coframe: np.ndarray, grade_gap: float
) -> tuple[np.ndarray, np.ndarray]:
    """Log singular values (descending) and right singular vectors of ``diag(e^ℓ)·C``."""
    m = coframe.shape[1]
    finite = np.isfinite(log_grades)
    k = int(np.count_nonzero(finite))
    if k == 0:
        return np.full(m, -np.inf), np.eye(m, dtype=np.complex128)

    order = np.argsort(-np.where(finite, log_grades, -np.inf), kind="stable")[:k]
    grades = np.asarray(log_grades, dtype=float)[order]
    rows = np.asarray(coframe)[order]
    q_hat, r_hat = scipy.linalg.qr(rows.conj().T)
    lower = r_hat[:k, :k].conj().T

    log_sv = np.full(m, -np.inf)
    local = np.zeros((k, k), dtype=np.complex128)
    cuts = [0, *(np.flatnonzero(grades[:-1] - grades[1:] > grade_gap) + 1).tolist(), k]
    for start, stop in zip(cuts[:-1], cuts[1:]):
        scaled = np.exp(grades[start:stop] - grades[start])[:, None] * lower[start:stop, start:stop]
        _, values, vh = np.linalg.svd(scaled)
        log_sv[start:stop] = grades[start] + safe_log(values)
        local[start:stop, start:stop] = vh.conj().T
    logger.debug("graded_svd: %d rows in %d block(s)", k, len(cuts) - 1)

    vectors = np.hstack([q_hat[:, :k] @ local, q_hat[:, k:]])
    ranking = np.argsort(-log_sv, kind="stable")
    return log_sv[ranking], vectors[:, ranking]
