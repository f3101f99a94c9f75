from __future__ import annotations

import argparse
from typing import NoReturn

from powerlim.commands import analyze, exp, growth, verify
from powerlim.errors import UsageError


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="powerlim",
        description="Limits of |A^n|^{1/n} and |e^{tA}|^{1/t} for complex square matrices.",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    analyze.register(subparsers)
    verify.register(subparsers)
    growth.register(subparsers)
    exp.register(subparsers)
    return parser
