from argparse import Namespace

from cctrends.commands.common import add_config_args, add_identification_args, add_panel_args, emit, read_matrix
from cctrends.commands.loadings import prepare
from cctrends.loadings.estimators import icc
from cctrends.loadings.inference import lrv, wald
from cctrends.pipeline.analyze import stage


def register(subparsers):
    parser = subparsers.add_parser("wald", help="Wald test of R′vec(ψ_*) = h")
    add_panel_args(parser)
    add_config_args(parser)
    add_identification_args(parser)
    parser.add_argument("--R", required=True, help="restriction matrix CSV (sr×m, no header)")
    parser.add_argument("--h", required=True, help="restriction values CSV (m entries, no header)")
    parser.add_argument("--out", help="JSON output path (default stdout)")
    parser.set_defaults(func=run, parser=parser)


def run(args: Namespace) -> int:
    R = read_matrix(args.R, "R")
    h = read_matrix(args.h, "h").ravel()
    panel, config, d, _, s, pair = prepare(args)
    with stage("loadings"):
        est = icc(panel, d, s, pair, tol=config.tol, max_iter=config.max_iter)
    with stage("wald"):
        result = wald(est, lrv(panel, d, est.psi_hat, est.beta_hat), panel, R, h)
    emit(result, args.out)
    return 0
