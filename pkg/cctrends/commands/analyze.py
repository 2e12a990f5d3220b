from argparse import Namespace
import logging

from cctrends.commands.common import (
    add_config_args,
    add_identification_args,
    add_panel_args,
    add_table_args,
    config_from_args,
    emit,
    read_matrix,
    settings_from_args,
)
from cctrends.pipeline.analyze import analyze_panel, load_panel
from cctrends.pipeline.plots import write_plot_data

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("analyze", help="run the full trend and loading analysis")
    add_panel_args(parser)
    add_config_args(parser)
    add_table_args(parser)
    add_identification_args(parser)
    parser.add_argument(
        "--count-method",
        choices=["maxgap", "f1", "f2", "f3", "seq-f1", "seq-finf"],
        help="method that fixes s (default maxgap)",
    )
    parser.add_argument("--include-zero", action="store_true", help="add index 0 to the f2/f3 sets")
    parser.add_argument("--k-grid", help="misspecification grid 'j,m' (K_i = K(1+ij), i=0..m)")
    parser.add_argument("--norm", choices=["one", "infinity"])
    parser.add_argument("--location", choices=["mean", "median"])
    parser.add_argument("--R", help="restriction matrix CSV (sr×m) for a Wald test")
    parser.add_argument("--h", help="restriction values CSV (m entries)")
    parser.add_argument("--out", help="report JSON path (default stdout)")
    parser.add_argument("--emit-plots", metavar="DIR", help="write eigenvalue, log-log and gap CSVs")
    parser.set_defaults(func=run, parser=parser)


def run(args: Namespace) -> int:
    if (args.R is None) != (args.h is None):
        args.parser.error("--R and --h must be given together")

    config = config_from_args(args)
    panel = load_panel(args.csv, config, args.select, args.aggregate, args.time_column)
    # --b/--c refer to the columns of the selected panel
    config = config_from_args(args, p=panel.p)

    report = analyze_panel(
        panel,
        config,
        tables_path=args.tables,
        no_simulate=args.no_simulate,
        settings=settings_from_args(args),
        R=read_matrix(args.R, "R") if args.R else None,
        h=read_matrix(args.h, "h").ravel() if args.h else None,
        progress=not args.quiet,
    )
    emit(report, args.out)
    if args.emit_plots:
        for path in write_plot_data(report, args.emit_plots):
            logger.info(f"Wrote {path}")
    return 0
