from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from powerlim.config import get_settings
from powerlim.errors import EXIT_OK, DomainError
from powerlim.services.expflow import RealPartFlag, trajectory_growth
from powerlim.services.yamamoto import ModulusFlag, growth_report, shell_invariance_check
from powerlim.storage.reports import growth_entry, plain, trajectory_entry
from powerlim.storage.schemas import AnalysisReport, GrowthEntry, TrajectoryEntry

logger = logging.getLogger(__name__)

INVARIANCE_STEPS = 5


@dataclass
class CommandResult:
    report: AnalysisReport
    exit_code: int = EXIT_OK


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not np.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return value


def non_negative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not np.isfinite(value) or value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def common_options() -> argparse.ArgumentParser:
    """Flags shared by every command."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--tol-cluster", dest="tol_cluster", type=non_negative_float, default=None)
    parent.add_argument("--K", dest="K", type=non_negative_int, default=20)
    parent.add_argument("--mem-tol", dest="mem_tol", type=non_negative_float, default=None)
    parent.add_argument("--seed", type=int, default=42)
    parent.add_argument("--series", default=None, help="write convergence series to this CSV path")
    parent.add_argument(
        "--log-level",
        dest="log_level",
        default="WARNING",
        choices=["CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"],
        type=str.upper,
    )
    return parent


def growth_entries(
    matrix: np.ndarray, flag: ModulusFlag, vectors: Sequence[np.ndarray]
) -> list[GrowthEntry]:
    """One entry per vector; a vector without a growth exponent becomes an error entry."""
    settings = get_settings()
    entries = []
    for index, vector in enumerate(vectors):
        try:
            report = growth_report(matrix, vector, flag=flag, k=settings.iterations)
            trace = shell_invariance_check(matrix, flag, vector, INVARIANCE_STEPS)
        except DomainError as exc:
            logger.warning("growth: vector %d skipped: %s", index, exc)
            entries.append(GrowthEntry(index=index, error=plain(exc.to_dict())))
            continue
        entries.append(growth_entry(index, report, trace))
    return entries


def trajectory_entries(
    matrix: np.ndarray, flag: RealPartFlag, vectors: Sequence[np.ndarray]
) -> list[TrajectoryEntry]:
    entries = []
    for index, vector in enumerate(vectors):
        try:
            report = trajectory_growth(matrix, vector, cluster_tol=flag.cluster_tol)
        except DomainError as exc:
            logger.warning("exp: trajectory %d skipped: %s", index, exc)
            entries.append(TrajectoryEntry(index=index, error=plain(exc.to_dict())))
            continue
        entries.append(trajectory_entry(index, report))
    return entries


def attach(report: AnalysisReport, **sections: Any) -> AnalysisReport:
    return report.model_copy(update=sections)
