from .numeric import (
    as_vector,
    finite_or_none,
    graded_log_norm,
    log_abs,
    nonzero_vector,
    safe_log,
    unit_phase,
)

__all__ = [
    "as_vector",
    "finite_or_none",
    "graded_log_norm",
    "log_abs",
    "nonzero_vector",
    "safe_log",
    "unit_phase",
]
