from __future__ import annotations

import argparse
import logging

from powerlim.commands.base import CommandResult, common_options, growth_entries
from powerlim.config import get_settings
from powerlim.services.yamamoto import modulus_flag
from powerlim.storage.matrix_io import load_matrix, load_vectors, matrix_digest, write_series_csv
from powerlim.storage.reports import flag_section
from powerlim.storage.schemas import AnalysisReport, GrowthEntry

logger = logging.getLogger(__name__)


def series_columns(entries: list[GrowthEntry]) -> dict[str, list[float | None]]:
    columns: dict[str, list[float | None]] = {}
    for entry in entries:
        if entry.series and "n" not in columns:
            columns["n"] = [point.n for point in entry.series]
        if entry.error is None:
            columns[f"x_{entry.index}"] = [point.value for point in entry.series]
    return columns


def handle(args: argparse.Namespace) -> CommandResult:
    matrix = load_matrix(args.matrix)
    vectors = load_vectors(args.vectors, matrix.shape[0])
    flag = modulus_flag(matrix, get_settings().cluster_tol)
    entries = growth_entries(matrix, flag, vectors)
    failed = sum(entry.error is not None for entry in entries)
    if failed:
        logger.warning("growth: %d of %d vector(s) reported as errors", failed, len(entries))
    if args.series:
        write_series_csv(args.series, series_columns(entries))
    report = AnalysisReport(
        command="growth",
        input_digest=matrix_digest(matrix),
        dimension=int(matrix.shape[0]),
        flag=flag_section(flag),
        iterations=get_settings().iterations,
        growth=entries,
    )
    return CommandResult(report=report)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "growth",
        parents=[common_options()],
        help="growth exponent and shell of each vector under A",
    )
    parser.add_argument("matrix")
    parser.add_argument("vectors", help="JSON vectors file")
    parser.set_defaults(handler=handle)
