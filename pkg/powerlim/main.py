from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

from powerlim.cli import build_parser
from powerlim.config import CliSettings, set_settings
from powerlim.errors import EXIT_USAGE, PowerLimError, UsageError
from powerlim.storage.matrix_io import report_json

logger = logging.getLogger(__name__)


def setup_logging(level: str = "WARNING") -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
        force=True,
    )


def settings_from_args(args: argparse.Namespace) -> CliSettings:
    values = {
        "cluster_tol": args.tol_cluster,
        "iterations": args.K,
        "mem_tol": args.mem_tol,
        "seed": args.seed,
        "log_level": args.log_level,
    }
    return CliSettings(**{key: value for key, value in values.items() if value is not None})


def _emit_error(error: PowerLimError) -> None:
    print(json.dumps(error.to_dict(), ensure_ascii=False, default=str))


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
    except UsageError as exc:
        _emit_error(exc)
        return EXIT_USAGE

    setup_logging(args.log_level)
    set_settings(settings_from_args(args))
    try:
        result = args.handler(args)
    except PowerLimError as exc:
        logger.error("%s failed: %s", args.command, exc)
        _emit_error(exc)
        return exc.exit_code
    finally:
        set_settings(None)

    print(report_json(result.report))
    return result.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
