from __future__ import annotations

import argparse
import logging

from powerlim.commands.base import CommandResult, common_options, non_negative_int, positive_float
from powerlim.config import get_settings
from powerlim.errors import EXIT_OK, EXIT_VERIFICATION
from powerlim.services.oracle import matrix_checks, run_suite
from powerlim.storage.matrix_io import load_matrix, matrix_digest
from powerlim.storage.reports import checks_section
from powerlim.storage.schemas import AnalysisReport

logger = logging.getLogger(__name__)


def dimension_range(text: str) -> tuple[int, ...]:
    """``4``, ``2-8`` or ``2,3,5``."""
    try:
        if "-" in text:
            low, high = (int(part) for part in text.split("-", 1))
            dims = tuple(range(low, high + 1))
        else:
            dims = tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid dimension list {text!r}") from exc
    if not dims or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"dimensions must be positive, got {text!r}")
    return dims


def handle(args: argparse.Namespace) -> CommandResult:
    settings = get_settings()
    matrix = load_matrix(args.matrix) if args.matrix else None
    suite = run_suite(
        seed=settings.seed,
        instances=settings.suite_instances if args.instances is None else args.instances,
        dims=settings.suite_dims if args.dims is None else args.dims,
        p_values=args.p,
        workers=settings.suite_workers if args.workers is None else args.workers,
        inject_violation=args.inject_violation,
    )
    extra = matrix_checks(matrix, args.p, settings.iterations) if matrix is not None else []
    section = checks_section(suite, extra)
    report = AnalysisReport(
        command="verify",
        input_digest=matrix_digest(matrix) if matrix is not None else None,
        dimension=int(matrix.shape[0]) if matrix is not None else None,
        checks=section,
    )
    if section.failed:
        logger.warning("verify: %d of %d check(s) failed", section.failed, section.total)
        return CommandResult(report=report, exit_code=EXIT_VERIFICATION)
    logger.info("verify: all %d check(s) passed", section.total)
    return CommandResult(report=report, exit_code=EXIT_OK)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "verify",
        parents=[common_options()],
        help="run the inequality checks on seeded random instances",
    )
    parser.add_argument("matrix", nargs="?", default=None)
    parser.add_argument("--p", nargs="+", type=positive_float, default=[0.5, 1.0, 2.0])
    parser.add_argument("--dims", type=dimension_range, default=None)
    parser.add_argument("--instances", type=non_negative_int, default=None)
    parser.add_argument("--workers", type=non_negative_int, default=None)
    parser.add_argument("--inject-violation", dest="inject_violation", action="store_true")
    parser.set_defaults(handler=handle)
