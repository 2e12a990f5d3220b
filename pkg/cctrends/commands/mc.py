from argparse import Namespace
from pathlib import Path
import json
import logging

from pydantic import ValidationError

from cctrends.commands.common import settings_from_args
from cctrends.config import load_config
from cctrends.errors import InputError, ParseError
from cctrends.mc.harness import DESK_P, paper_grid, run_grid
from cctrends.mc.tables import emit_tables
from cctrends.models.types import DgpConfig, GridFile
from cctrends.pipeline.analyze import SEQUENTIAL_METHODS, ensure_tables

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("mc", help="Monte Carlo frequency and MAE tables")
    parser.add_argument("--grid", help="grid JSON (points, design_p, full, methods, eta, K)")
    parser.add_argument("--full", action="store_true", help="standard design up to p=300 (hours)")
    parser.add_argument("--reps", type=int, default=1000, help="replications per grid point")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--tables", help="critical-value file for sequential methods")
    parser.add_argument("--cache-dir", help="table cache (default $CCTRENDS_CACHE_DIR)")
    parser.add_argument("--config", help="JSON analysis settings (table sizes and seed)")
    parser.set_defaults(func=run, parser=parser)


def read_grid(path: str | None) -> GridFile:
    if path is None:
        return GridFile()
    path = Path(path)
    if not path.exists():
        raise InputError(f"grid file not found: {path}")
    try:
        return GridFile.model_validate(json.loads(path.read_text()))
    except json.JSONDecodeError as e:
        raise ParseError(f"grid file {path} is not valid JSON: {e}")
    except ValidationError as e:
        raise InputError(f"invalid grid file {path}: {e}")


def run(args: Namespace) -> int:
    spec = read_grid(args.grid)
    grid = [DgpConfig(p=pt.p, s=pt.s, a=pt.a, T=pt.T, seed=args.seed) for pt in spec.points]
    if not grid or spec.design_p or spec.full or args.full:
        grid += paper_grid(spec.design_p or DESK_P, full=spec.full or args.full, seed=args.seed)

    tables = None
    if any(m in SEQUENTIAL_METHODS for m in spec.methods):
        config = load_config(args.config, {"eta": spec.eta})
        tables = ensure_tables(max(c.p for c in grid), config, settings_from_args(args), args.tables)

    results = run_grid(
        grid,
        spec.methods,
        n_reps=args.reps,
        K=spec.K,
        seed=args.seed,
        tables=tables,
        eta=spec.eta,
        out_dir=args.out,
        progress=not args.quiet,
    )
    for path in emit_tables(results, args.out):
        logger.info(f"Wrote {path}")
    return 0
