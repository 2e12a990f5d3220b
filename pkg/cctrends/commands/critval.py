from argparse import Namespace
import sys

from cctrends.cache.table_cache import TableCache
from cctrends.commands.common import emit, settings_from_args
from cctrends.limitlaw.simulate import DEFAULT_ETAS, DEFAULT_REPS, DEFAULT_STEPS, build_table


def register(subparsers):
    parser = subparsers.add_parser("critval", help="simulate limit-law critical values")
    parser.add_argument("--s-max", type=int, default=10, help="tables for s = 1..s_max")
    parser.add_argument("--eta", type=float, nargs="+", default=list(DEFAULT_ETAS), help="significance levels")
    parser.add_argument("--reps", type=int, default=DEFAULT_REPS, help="replications")
    parser.add_argument("--steps", type=int, default=DEFAULT_STEPS, help="steps per Brownian path")
    parser.add_argument("--seed", type=int, default=20240101)
    parser.add_argument("--cache-dir", help="table cache (default $CCTRENDS_CACHE_DIR)")
    parser.add_argument("--out", help="write the catalog JSON here (default stdout)")
    parser.add_argument("--list", action="store_true", help="list cached tables and exit")
    parser.set_defaults(func=run, parser=parser)


def run(args: Namespace) -> int:
    cache = TableCache(settings_from_args(args).cache_dir)
    if args.list:
        for t in cache.list():
            etas = ",".join(f"{e:g}" for e in sorted(map(float, t.quantiles_trace)))
            sys.stdout.write(f"s={t.s}\tsteps={t.n_steps}\treps={t.n_reps}\tseed={t.seed}\teta={etas}\n")
        return 0

    if any(not 0 < e < 1 for e in args.eta):
        args.parser.error("--eta values must lie in (0, 1)")
    catalog = build_table(
        args.s_max,
        args.eta,
        n_steps=args.steps,
        n_reps=args.reps,
        seed=args.seed,
        cache=cache,
        progress=not args.quiet,
    )
    emit(catalog, args.out)
    return 0
