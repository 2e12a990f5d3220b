from argparse import Namespace

from cctrends.basis.design import build_design, default_K
from cctrends.cca.core import cca
from cctrends.commands.common import (
    METHOD_NAMES,
    add_config_args,
    add_panel_args,
    add_table_args,
    config_from_args,
    emit,
    settings_from_args,
)
from cctrends.pipeline.analyze import SEQUENTIAL_METHODS, count_all, ensure_tables, load_panel, stage


def register(subparsers):
    parser = subparsers.add_parser("count", help="estimate the number of stochastic trends")
    add_panel_args(parser)
    add_config_args(parser)
    add_table_args(parser)
    parser.add_argument("--method", choices=[*METHOD_NAMES, "all"], default="maxgap")
    parser.add_argument("--include-zero", action="store_true", help="add index 0 to the f2/f3 sets")
    parser.add_argument("--out", help="JSON output path (default stdout)")
    parser.set_defaults(func=run, parser=parser)


def run(args: Namespace) -> int:
    config = config_from_args(args)
    panel = load_panel(args.csv, config, args.select, args.aggregate, args.time_column)
    K = config.K or default_K(panel.T)
    with stage("cca"):
        lam = cca(panel.values, build_design(K, panel.T)).eigenvalues

    methods = list(METHOD_NAMES.values()) if args.method == "all" else [METHOD_NAMES[args.method]]
    tables = None
    if any(m in SEQUENTIAL_METHODS for m in methods):
        with stage("tables"):
            tables = ensure_tables(
                panel.p, config, settings_from_args(args), args.tables, args.no_simulate, not args.quiet
            )
    with stage("count"):
        counts = count_all(lam, panel.T, K, tables, config, methods)

    if args.method == "all":
        emit({"T": panel.T, "p": panel.p, "K": K, "counts": {k: v.model_dump(mode="json") for k, v in counts.items()}}, args.out)
    else:
        method = METHOD_NAMES[args.method]
        if method.value not in counts:
            args.parser.error(f"{method.value} is not defined for p={panel.p}")
        emit(counts[method.value], args.out)
    return 0
