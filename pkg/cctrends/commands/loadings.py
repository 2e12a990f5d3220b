from argparse import Namespace

from cctrends.basis.design import build_design, default_K
from cctrends.cca.core import cca
from cctrends.commands.common import (
    add_config_args,
    add_identification_args,
    add_panel_args,
    config_from_args,
    emit,
)
from cctrends.errors import DimensionError
from cctrends.loadings.estimators import coordinate_pair, icc, one_step
from cctrends.loadings.inference import coefficient_pvalues, lrv
from cctrends.pipeline.analyze import load_panel, stage
from cctrends.trends.count import max_gap
from cctrends.trends.identification import search_identification


def register(subparsers):
    parser = subparsers.add_parser("loadings", help="estimate ψ and β by one-step or ICC")
    add_panel_args(parser)
    add_config_args(parser)
    add_identification_args(parser)
    parser.add_argument("--one-step", action="store_true", help="stop after the one-step estimator")
    parser.add_argument("--out", help="JSON output path (default stdout)")
    parser.set_defaults(func=run, parser=parser)


def prepare(args: Namespace):
    """Panel, config, basis, s and identification pair shared by loadings and wald."""
    config = config_from_args(args)
    panel = load_panel(args.csv, config, args.select, args.aggregate, args.time_column)
    config = config_from_args(args, p=panel.p)
    K = config.K or default_K(panel.T)
    d = build_design(K, panel.T)

    with stage("cca"):
        result = cca(panel.values, d)
    s = config.s if config.s is not None else max_gap(result.eigenvalues).s_hat
    if not 0 < s < panel.p:
        raise DimensionError(f"loadings need 0 < s < p, got s={s}, p={panel.p}")

    with stage("identification"):
        if config.c_columns is not None:
            pair = coordinate_pair(panel.p, c_columns=config.c_columns)
        elif config.b_columns is not None:
            pair = coordinate_pair(panel.p, b_columns=config.b_columns)
        else:
            decision = search_identification(panel, d, s)
            pair = coordinate_pair(panel.p, b_columns=decision.b_columns)
    return panel, config, d, result, s, pair


def run(args: Namespace) -> int:
    panel, config, d, result, s, pair = prepare(args)
    with stage("loadings"):
        if args.one_step:
            est = one_step(panel, d, result, s, pair)
        else:
            est = icc(panel, d, s, pair, tol=config.tol, max_iter=config.max_iter)
    with stage("inference"):
        lrv_est = lrv(panel, d, est.psi_hat, est.beta_hat)
        coefficients = coefficient_pvalues(est, lrv_est, panel)

    emit(
        {
            "T": panel.T,
            "p": panel.p,
            "K": d.K,
            "s": s,
            "labels": panel.labels,
            "estimate": est.model_dump(mode="json"),
            "lrv": lrv_est.model_dump(mode="json"),
            "coefficients": coefficients.model_dump(mode="json"),
        },
        args.out,
    )
    return 0
