from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np
import scipy.linalg
from numpy.linalg import LinAlgError

from powerlim.config import get_settings
from powerlim.errors import DomainError, FactorizationError, SeparationError
from powerlim.services.graded import GradedPower, graded_from_matrix, graded_square

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.setflags(write=False)
    return array


def as_matrix(values: Any) -> np.ndarray:
    """Square, finite, read-only complex128 matrix."""
    matrix = np.array(values, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise DomainError(f"expected a non-empty square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DomainError("matrix has non-finite entries")
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True)
class HermitianMatrix:
    data: np.ndarray

    @property
    def size(self) -> int:
        return int(self.data.shape[0])


@dataclass(frozen=True)
class PsdMatrix(HermitianMatrix):
    eigvals: np.ndarray
    eigvecs: np.ndarray

    def trace_power(self, p: float) -> float:
        return float(np.sum(self.eigvals**p))


def _hermitianize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.conj().T) / 2


def psd_from_spectrum(eigvals: np.ndarray, eigvecs: np.ndarray) -> PsdMatrix:
    order = np.argsort(eigvals, kind="stable")
    values = np.maximum(np.asarray(eigvals, dtype=float)[order], 0.0)
    vectors = np.asarray(eigvecs, dtype=np.complex128)[:, order]
    data = _hermitianize((vectors * values) @ vectors.conj().T)
    return PsdMatrix(data=_frozen(data), eigvals=_frozen(values), eigvecs=_frozen(vectors))


def as_hermitian(values: Any, herm_tol: float | None = None) -> HermitianMatrix:
    if isinstance(values, HermitianMatrix):
        return values
    matrix = as_matrix(values)
    tol = get_settings().herm_tol if herm_tol is None else herm_tol
    defect = float(np.linalg.norm(matrix - matrix.conj().T, 2))
    if defect > tol * op_norm(matrix):
        raise DomainError(f"matrix is not Hermitian (‖M − M*‖ = {defect:.3g})")
    return HermitianMatrix(data=_frozen(_hermitianize(matrix)))


def as_psd(values: Any, psd_tol: float | None = None) -> PsdMatrix:
    if isinstance(values, PsdMatrix):
        return values
    hermitian = as_hermitian(values)
    tol = get_settings().psd_tol if psd_tol is None else psd_tol
    eigvals, eigvecs = herm_eig(hermitian)
    scale = float(np.max(np.abs(eigvals)))
    if eigvals[0] < -tol * scale:
        raise DomainError(f"matrix is not positive semidefinite (λ_min = {eigvals[0]:.3g})")
    return psd_from_spectrum(eigvals, eigvecs)


def schur(a: Any) -> tuple[np.ndarray, np.ndarray]:
    """Complex Schur form A = Q T Q*."""
    matrix = as_matrix(a)
    settings = get_settings()
    m = matrix.shape[0]
    try:
        t, q = scipy.linalg.schur(matrix, output="complex")
    except LinAlgError as exc:
        raise FactorizationError("schur", settings.max_iter(m), str(exc)) from exc
    t = np.triu(t)
    scale = max(float(np.linalg.norm(matrix, 2)), np.finfo(float).tiny)
    residual = float(np.linalg.norm(q @ t @ q.conj().T - matrix, 2))
    if residual > settings.tol_fact * scale * m:
        logger.warning("schur: reconstruction residual %.3g exceeds tolerance", residual / scale)
    return q, t


def _swap_adjacent(t: np.ndarray, q: np.ndarray, k: int) -> None:
    t11 = t[k, k]
    t22 = t[k + 1, k + 1]
    x = t[k, k + 1]
    y = t22 - t11
    radius = np.hypot(abs(x), abs(y))
    if y == 0 or radius == 0:
        return
    c = x / radius
    s = y / radius
    rotation = np.array([[c, -np.conj(s)], [s, np.conj(c)]])
    t[k : k + 2, :] = rotation.conj().T @ t[k : k + 2, :]
    t[:, k : k + 2] = t[:, k : k + 2] @ rotation
    q[:, k : k + 2] = q[:, k : k + 2] @ rotation
    t[k + 1, k] = 0.0
    t[k, k] = t22
    t[k + 1, k + 1] = t11


def ordered_schur(
    a: Any, select: Callable[[complex], bool]
) -> tuple[np.ndarray, np.ndarray, int]:
    """Schur form with every selected eigenvalue moved to the leading block.

    Selected diagonal entries are bubbled upward by adjacent Givens swaps; the first
    ``r`` columns of ``Q`` span the invariant subspace of the selected eigenvalues.
    """
    q, t = schur(a)
    q = q.copy()
    t = t.copy()
    m = t.shape[0]
    leading = 0
    swaps = 0
    for i in range(m):
        if not select(complex(t[i, i])):
            continue
        for k in range(i - 1, leading - 1, -1):
            _swap_adjacent(t, q, k)
            swaps += 1
        leading += 1
    logger.debug("ordered_schur: %d selected, %d swaps", leading, swaps)
    return q, t, leading


def herm_eig(h: Any) -> tuple[np.ndarray, np.ndarray]:
    hermitian = as_hermitian(h)
    settings = get_settings()
    try:
        eigvals, eigvecs = scipy.linalg.eigh(hermitian.data)
    except LinAlgError as exc:
        raise FactorizationError("herm_eig", settings.max_iter(hermitian.size), str(exc)) from exc
    return eigvals, eigvecs


def svd(a: Any) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """A = U diag(s) V*, s descending. Returns (U, s, V)."""
    matrix = as_matrix(a)
    try:
        u, s, vh = scipy.linalg.svd(matrix)
    except LinAlgError as exc:
        raise FactorizationError("svd", get_settings().max_iter(matrix.shape[0]), str(exc)) from exc
    return u, s, vh.conj().T


def abs_psd(a: Any) -> PsdMatrix:
    """|A| = √(A*A)."""
    _, s, v = svd(a)
    return psd_from_spectrum(s, v)


def psd_power(h: PsdMatrix, p: float) -> PsdMatrix:
    if not np.isfinite(p) or p <= 0:
        raise DomainError(f"psd_power needs p > 0, got {p}")
    psd = as_psd(h)
    return psd_from_spectrum(psd.eigvals**p, psd.eigvecs)


def op_norm(a: Any) -> float:
    matrix = np.asarray(a, dtype=np.complex128)
    try:
        return float(scipy.linalg.svdvals(matrix)[0])
    except LinAlgError as exc:
        raise FactorizationError("svd", get_settings().max_iter(matrix.shape[0]), str(exc)) from exc


def eigenvalues(a: Any) -> np.ndarray:
    _, t = schur(a)
    return np.diag(t).copy()


def spectral_radius(a: Any) -> float:
    return float(np.max(np.abs(eigenvalues(a))))


@dataclass(frozen=True)
class ScaledPower:
    base: np.ndarray
    log_scale: float
    exponent: int
    graded: GradedPower

    @property
    def is_zero(self) -> bool:
        return self.log_scale == float("-inf")

    def matrix(self) -> np.ndarray:
        if self.is_zero:
            return np.zeros_like(self.base)
        return np.exp(self.log_scale) * self.base


def _scaled(graded: GradedPower) -> ScaledPower:
    log_scale, base = graded.scale_and_base()
    return ScaledPower(base=_frozen(base), log_scale=log_scale, exponent=graded.exponent, graded=graded)


def power_ladder(a: Any, k: int) -> list[ScaledPower]:
    """ScaledPower of A^{2^K′} for K′ = 0..K from one chain of squarings."""
    if k < 0:
        raise DomainError(f"K must be non-negative, got {k}")
    current = graded_from_matrix(as_matrix(a))
    ladder = [_scaled(current)]
    for _ in range(k):
        current = graded_square(current)
        ladder.append(_scaled(current))
    logger.debug("power_ladder: reached n = %d, log_scale = %s", current.exponent, ladder[-1].log_scale)
    return ladder


def scaled_power(a: Any, k: int) -> ScaledPower:
    return power_ladder(a, k)[-1]


def sylvester_solve(
    t11: Any, t22: Any, c: Any, sep_tol: float | None = None
) -> np.ndarray:
    """Solve T11·X − X·T22 = C for upper-triangular T11, T22 by back-substitution."""
    t11 = np.asarray(t11, dtype=np.complex128)
    t22 = np.asarray(t22, dtype=np.complex128)
    rhs = np.asarray(c, dtype=np.complex128)
    p, q = t11.shape[0], t22.shape[0]
    if p == 0 or q == 0:
        return np.zeros((p, q), dtype=np.complex128)
    if sep_tol is None:
        sep_tol = get_settings().sep_rel_tol * (op_norm(t11) + op_norm(t22))

    d11 = np.diag(t11)
    d22 = np.diag(t22)
    gaps = np.abs(d11[:, None] - d22[None, :])
    i, j = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
    gap = float(gaps[i, j])
    if gap == 0 or gap < sep_tol:
        raise SeparationError((complex(d11[i]), complex(d22[j])), gap, sep_tol)

    x = np.zeros((p, q), dtype=np.complex128)
    identity = np.eye(p, dtype=np.complex128)
    for col in range(q):
        column_rhs = rhs[:, col] + x[:, :col] @ t22[:col, col]
        x[:, col] = scipy.linalg.solve_triangular(t11 - t22[col, col] * identity, column_rhs)
    return x
