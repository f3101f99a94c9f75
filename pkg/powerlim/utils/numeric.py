from __future__ import annotations

from typing import Any

import numpy as np
from scipy.special import logsumexp

from powerlim.errors import DomainError


def as_vector(values: Any, m: int | None = None) -> np.ndarray:
    vector = np.array(values, dtype=np.complex128).reshape(-1)
    if m is not None and vector.shape[0] != m:
        raise DomainError(f"vector has length {vector.shape[0]}, expected {m}")
    if not np.all(np.isfinite(vector)):
        raise DomainError("vector has non-finite entries")
    return vector


def nonzero_vector(values: Any, m: int | None = None) -> np.ndarray:
    vector = as_vector(values, m)
    if not np.any(vector):
        raise DomainError("the zero vector has no growth exponent")
    return vector


def unit_phase(values: np.ndarray) -> np.ndarray:
    """z/|z| elementwise, 0 where z = 0."""
    magnitude = np.abs(values)
    safe = np.where(magnitude > 0, magnitude, 1.0)
    return np.where(magnitude > 0, values / safe, 0.0)


def safe_log(values: Any) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(values, dtype=float))


def log_abs(values: np.ndarray) -> np.ndarray:
    return safe_log(np.abs(values))


def graded_log_norm(log_grades: np.ndarray, vector: np.ndarray) -> float:
    """ln ‖diag(e^ℓ)·y‖ without forming e^ℓ."""
    terms = 2.0 * (log_grades + log_abs(vector))
    if not np.any(np.isfinite(terms)):
        return float("-inf")
    return 0.5 * float(logsumexp(terms))


def finite_or_none(value: float) -> float | None:
    value = float(value)
    if not np.isfinite(value):
        return None
    return value
