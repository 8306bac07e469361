"""hunter - self-similar implosion profiles.

Command-line entry point: builds the parser, includes the subcommand modules
and maps failures to exit codes.
"""
import argparse
import logging
import sys
from typing import List, Optional

from hunter.cli import constants, isothermal, lp, match, sweep, verify
from hunter.config import settings
from hunter.errors import HunterError, UsageError

logger = logging.getLogger(__name__)

SUBCOMMANDS = (isothermal, constants, match, lp, verify, sweep)


class Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(UsageError.exit_code, f"{self.prog}: error: {message}\n")


def build_parser() -> Parser:
    parser = Parser(prog=settings.app_name, description="Self-similar Euler-Poisson implosion profiles")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True, parser_class=Parser)
    for module in SUBCOMMANDS:
        module.register(subparsers)
    return parser


def configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if (verbose or settings.debug) else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(asctime)s %(name)s %(levelname)s %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(getattr(args, "verbose", False))
    try:
        return args.handler(args)
    except HunterError as exc:
        logger.debug("failure", exc_info=True)
        print(f"{settings.app_name} {args.subcommand}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
