from __future__ import annotations

import argparse
import logging
from typing import Sequence

import numpy as np

from powerlim.commands.base import CommandResult, common_options, trajectory_entries
from powerlim.config import get_settings
from powerlim.services.expflow import exp_iterate_limit, exp_limit_matrix, realpart_flag
from powerlim.storage.matrix_io import load_matrix, load_vectors, matrix_digest, matrix_to_file
from powerlim.storage.reports import flag_section
from powerlim.storage.schemas import AnalysisReport, ExpSection

logger = logging.getLogger(__name__)


def exp_section(matrix: np.ndarray, vectors: Sequence[np.ndarray] = ()) -> ExpSection:
    settings = get_settings()
    flag = realpart_flag(matrix, settings.cluster_tol)
    closed = exp_limit_matrix(matrix, flag.cluster_tol)
    iterative = exp_iterate_limit(matrix, settings.iterations)
    return ExpSection(
        realpart_flag=flag_section(flag),
        limit=matrix_to_file(closed.data),
        iterative=matrix_to_file(iterative.data),
        iterations=settings.iterations,
        trajectories=trajectory_entries(matrix, flag, vectors),
    )


def handle(args: argparse.Namespace) -> CommandResult:
    matrix = load_matrix(args.matrix)
    vectors = load_vectors(args.vectors, matrix.shape[0]) if args.vectors else []
    section = exp_section(matrix, vectors)
    logger.info("exp: %d real-part level(s)", len(section.realpart_flag.levels))
    report = AnalysisReport(
        command="exp",
        input_digest=matrix_digest(matrix),
        dimension=int(matrix.shape[0]),
        exp=section,
    )
    return CommandResult(report=report)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "exp",
        parents=[common_options()],
        help="limits of |e^{tA}|^{1/t} and trajectory growth classification",
    )
    parser.add_argument("matrix")
    parser.add_argument("--vectors", default=None, help="JSON vectors file of initial conditions")
    parser.set_defaults(handler=handle)
