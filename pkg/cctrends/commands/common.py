"""Flags and helpers shared by the subcommands."""

from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Optional
import sys

import numpy as np
import pandas as pd
from pydantic import BaseModel

from cctrends.config import Settings, load_config
from cctrends.errors import InputError, ParseError
from cctrends.models.types import AnalysisConfig, CountMethod
from cctrends.output.writer import dump_json, write_json
from cctrends.panel.selection import parse_index_spec

METHOD_NAMES = {
    "maxgap": CountMethod.MAX_GAP,
    "f1": CountMethod.F1,
    "f2": CountMethod.F2,
    "f3": CountMethod.F3,
    "seq-f1": CountMethod.SEQ_F1,
    "seq-finf": CountMethod.SEQ_FINF,
}


def add_panel_args(parser: ArgumentParser):
    parser.add_argument("csv", help="panel CSV with a header row")
    parser.add_argument("--time-column", help="header name of a time-stamp column to drop")
    parser.add_argument("--select", help="1-based columns to keep, e.g. 1-11,14")
    parser.add_argument("--aggregate", help="groups to average, e.g. '1-3;4-6'")


def add_config_args(parser: ArgumentParser):
    parser.add_argument("--config", help="JSON file with analysis settings")
    parser.add_argument("--log", action="store_true", default=None, help="take natural logs first")
    parser.add_argument("--normalize-start", action="store_true", default=None, help="subtract the first row")
    parser.add_argument("--init-mode", choices=["levels", "difference-from-start"])
    parser.add_argument("--K", type=int, help="number of basis functions (default ⌈T^{3/4}⌉)")
    parser.add_argument("--eta", type=float, help="significance level")
    parser.add_argument("--seed", type=int, help="base seed for simulated critical values")
    parser.add_argument("--cache-dir", help="limit-law table cache (default $CCTRENDS_CACHE_DIR)")


def add_table_args(parser: ArgumentParser):
    parser.add_argument("--tables", help="critical-value file written by `critval --out`")
    parser.add_argument("--no-simulate", action="store_true", help="fail instead of simulating missing tables")


def add_identification_args(parser: ArgumentParser):
    parser.add_argument("--s", type=int, help="number of stochastic trends (default: estimated)")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--b", help="1-based columns of b (b′ψ = I_s)")
    group.add_argument("--c", help="1-based columns of c (c′β = I_r)")
    parser.add_argument("--tol", type=float, help="ICC stopping tolerance")
    parser.add_argument("--max-iter", type=int, help="ICC iteration limit")


def parse_k_grid(value: str) -> tuple[int, int]:
    try:
        j, m = (int(v) for v in value.split(","))
    except ValueError:
        raise ParseError(f"--k-grid expects 'j,m', got '{value}'")
    return j, m


def config_from_args(args: Namespace, p: Optional[int] = None) -> AnalysisConfig:
    """Config file values overridden by explicit flags."""
    overrides = {
        "log": getattr(args, "log", None),
        "normalize_start": getattr(args, "normalize_start", None),
        "init_mode": getattr(args, "init_mode", None),
        "K": getattr(args, "K", None),
        "eta": getattr(args, "eta", None),
        "seed": getattr(args, "seed", None),
        "s": getattr(args, "s", None),
        "tol": getattr(args, "tol", None),
        "max_iter": getattr(args, "max_iter", None),
        "norm": getattr(args, "norm", None),
        "location": getattr(args, "location", None),
        "include_zero": getattr(args, "include_zero", None) or None,
    }
    if getattr(args, "k_grid", None):
        overrides["k_grid_j"], overrides["k_grid_m"] = parse_k_grid(args.k_grid)
    if getattr(args, "count_method", None):
        overrides["count_method"] = METHOD_NAMES[args.count_method]
    if p is not None:
        if getattr(args, "b", None):
            overrides["b_columns"] = parse_index_spec(args.b, p)
        if getattr(args, "c", None):
            overrides["c_columns"] = parse_index_spec(args.c, p)
    return load_config(getattr(args, "config", None), overrides)


def settings_from_args(args: Namespace) -> Settings:
    return Settings(getattr(args, "cache_dir", None))


def read_matrix(path: str | Path, name: str) -> np.ndarray:
    """Numeric CSV without header, as a 2-D array."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"{name} file not found: {path}")
    try:
        frame = pd.read_csv(path, header=None, skipinitialspace=True)
        values = frame.to_numpy(dtype=float)
    except Exception as e:
        raise ParseError(f"Failed to read {name} from {path}: {e}")
    if not np.all(np.isfinite(values)):
        raise ParseError(f"{name} in {path} has empty or non-finite entries")
    return values


def emit(obj: BaseModel | dict | list, out: Optional[str]):
    """Write JSON to a file, or to stdout when out is None or '-'."""
    if out and out != "-":
        write_json(out, obj)
    else:
        sys.stdout.write(dump_json(obj))
