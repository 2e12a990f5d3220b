from argparse import Namespace
import sys

from cctrends import __version__
from cctrends.commands.common import emit
from cctrends.config import Settings, load_config


def register(subparsers):
    parser = subparsers.add_parser("config", help="validate or show analysis settings")
    actions = parser.add_subparsers(dest="action", required=True)
    validate = actions.add_parser("validate", help="check a JSON settings file")
    validate.add_argument("file")
    actions.add_parser("show", help="print the default settings")
    parser.set_defaults(func=run, parser=parser)

    version = subparsers.add_parser("version", help="print the tool version")
    version.set_defaults(func=show_version, parser=version)


def run(args: Namespace) -> int:
    if args.action == "validate":
        load_config(args.file)
        sys.stdout.write(f"{args.file}: ok\n")
        return 0
    emit({"config": load_config(None).model_dump(mode="json"), "cache_dir": str(Settings().cache_dir)}, None)
    return 0


def show_version(args: Namespace) -> int:
    sys.stdout.write(f"cctrends {__version__}\n")
    return 0
