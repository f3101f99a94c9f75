from __future__ import annotations

import argparse
import logging

import numpy as np

from powerlim.commands.base import CommandResult, attach, common_options, growth_entries
from powerlim.commands.exp import exp_section
from powerlim.config import get_settings
from powerlim.services.jordan import jordan_chevalley
from powerlim.services.matcore import eigenvalues
from powerlim.services.yamamoto import (
    AsymptoticLimit,
    SingularValueLimits,
    iterate_limit,
    limit_matrix,
    singular_value_limits,
)
from powerlim.storage.matrix_io import (
    load_matrix,
    load_vectors,
    matrix_digest,
    matrix_to_file,
    write_series_csv,
)
from powerlim.storage.reports import cluster_entries, flag_section, pairs, plain, series_points
from powerlim.storage.schemas import AnalysisReport, SingularValueSection

logger = logging.getLogger(__name__)


def analysis_report(
    matrix: np.ndarray,
) -> tuple[AnalysisReport, AsymptoticLimit, SingularValueLimits]:
    settings = get_settings()
    decomposition = jordan_chevalley(matrix, settings.cluster_tol)
    limit = limit_matrix(matrix, decomposition.cluster_tol)
    iterative = iterate_limit(matrix, settings.iterations)
    limits = singular_value_limits(matrix, decomposition.cluster_tol, settings.iterations)
    report = AnalysisReport(
        command="analyze",
        input_digest=matrix_digest(matrix),
        dimension=int(matrix.shape[0]),
        eigenvalues=pairs(eigenvalues(matrix)),
        clusters=cluster_entries(decomposition.clusters),
        jc_residuals=plain(decomposition.residuals()),
        flag=flag_section(limit.flag),
        h_closed_form=matrix_to_file(limit.h.data),
        h_iterative=matrix_to_file(iterative.data),
        iterations=settings.iterations,
        singular_value_limits=SingularValueSection(
            limits=list(limits.limits),
            series=[series_points(column) for column in limits.series],
        ),
    )
    logger.info("analyze: moduli %s", limit.flag.moduli)
    return report, limit, limits


def series_columns(limits: SingularValueLimits) -> dict[str, list[float]]:
    columns: dict[str, list[float]] = {}
    if limits.series and limits.series[0]:
        columns["n"] = [n for n, _ in limits.series[0]]
    for j, column in enumerate(limits.series, start=1):
        columns[f"s_{j}"] = [value for _, value in column]
    return columns


def handle(args: argparse.Namespace) -> CommandResult:
    matrix = load_matrix(args.matrix)
    vectors = load_vectors(args.vectors, matrix.shape[0]) if args.vectors else []
    report, limit, limits = analysis_report(matrix)
    if vectors:
        report = attach(report, growth=growth_entries(matrix, limit.flag, vectors))
    if args.exp:
        report = attach(report, exp=exp_section(matrix, vectors))
    if args.series:
        write_series_csv(args.series, series_columns(limits))
    return CommandResult(report=report)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "analyze",
        parents=[common_options()],
        help="closed-form and iterative limit of |A^n|^{1/n}",
    )
    parser.add_argument("matrix")
    parser.add_argument("--vectors", default=None, help="JSON vectors file for growth reports")
    parser.add_argument("--exp", action="store_true", help="attach the exponential-flow section")
    parser.set_defaults(handler=handle)
