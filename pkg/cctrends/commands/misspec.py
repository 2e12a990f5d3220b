from argparse import Namespace

from cctrends.basis.design import build_design, default_K, k_grid
from cctrends.cca.core import cca
from cctrends.commands.common import (
    add_config_args,
    add_panel_args,
    add_table_args,
    config_from_args,
    emit,
    settings_from_args,
)
from cctrends.output.writer import atomic_write_text
from cctrends.pipeline.analyze import ensure_tables, load_panel, stage
from cctrends.pipeline.plots import loglog_frame
from cctrends.trends.count import max_gap
from cctrends.trends.misspec import misspec_diagnostic


def register(subparsers):
    parser = subparsers.add_parser("misspec", help="log-log diagnostic and confidence stripe")
    add_panel_args(parser)
    add_config_args(parser)
    add_table_args(parser)
    parser.add_argument("--s", type=int, help="number of stochastic trends (default: max-gap estimate)")
    parser.add_argument("--k-grid", help="grid 'j,m' with K_i = K(1+ij), i=0..m (default 1,2)")
    parser.add_argument("--norm", choices=["one", "infinity"])
    parser.add_argument("--location", choices=["mean", "median"])
    parser.add_argument("--csv-out", help="CSV of logK,logStat,stripeLow,stripeHigh")
    parser.add_argument("--out", help="JSON output path (default stdout)")
    parser.set_defaults(func=run, parser=parser)


def run(args: Namespace) -> int:
    config = config_from_args(args)
    panel = load_panel(args.csv, config, args.select, args.aggregate, args.time_column)
    K = config.K or default_K(panel.T)
    s = config.s
    if s is None:
        with stage("cca"):
            s = max_gap(cca(panel.values, build_design(K, panel.T)).eigenvalues).s_hat

    with stage("tables"):
        tables = ensure_tables(max(s, 1), config, settings_from_args(args), args.tables, args.no_simulate, not args.quiet)
    with stage("misspec"):
        diag = misspec_diagnostic(
            panel,
            s,
            k_grid(K, config.k_grid_j, config.k_grid_m),
            config.norm,
            tables.table(s),
            config.eta,
            config.location,
        )
    if args.csv_out:
        atomic_write_text(args.csv_out, loglog_frame(diag).to_csv(index=False))
    emit(diag, args.out)
    return 0
