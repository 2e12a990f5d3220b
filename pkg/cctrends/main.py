from argparse import ArgumentParser
from typing import Optional, Sequence
import logging
import sys

from cctrends import __version__
from cctrends.commands import analyze, config, count, critval, loadings, mc, misspec, simulate, wald
from cctrends.errors import AnalysisError

logger = logging.getLogger("cctrends")

COMMANDS = (analyze, count, misspec, loadings, wald, critval, mc, simulate, config)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="cctrends",
        description="Stochastic trends and their loadings via canonical correlations with a KL basis",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only, no progress bars")
    parser.add_argument("--version", action="version", version=f"cctrends {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except AnalysisError as e:
        logger.debug("command failed", exc_info=True)
        sys.stderr.write(f"error: {e.detail}\n")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
