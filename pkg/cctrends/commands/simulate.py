from argparse import Namespace
import logging

from cctrends.mc.dgp import simulate_dgp
from cctrends.models.types import DgpConfig
from cctrends.panel.ingest import write_csv

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("simulate", help="write one simulated panel as CSV")
    parser.add_argument("--p", type=int, required=True)
    parser.add_argument("--s", type=int, required=True)
    parser.add_argument("--a", type=float, default=1.0)
    parser.add_argument("--T", type=int, required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True, help="CSV path")
    parser.set_defaults(func=run, parser=parser)


def run(args: Namespace) -> int:
    if not 0 <= args.s <= args.p:
        args.parser.error("--s must lie in [0, p]")
    if not 0 < args.a <= 1:
        args.parser.error("--a must lie in (0, 1]")
    panel = simulate_dgp(DgpConfig(p=args.p, s=args.s, a=args.a, T=args.T, seed=args.seed))
    path = write_csv(panel, args.out)
    logger.info(f"Wrote {panel.T}×{panel.p} panel to {path}")
    return 0
