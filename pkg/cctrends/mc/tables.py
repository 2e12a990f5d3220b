from pathlib import Path
from typing import Dict, List, Sequence
import logging

import numpy as np
import pandas as pd

from cctrends.errors import InputError
from cctrends.models.types import ExperimentResult
from cctrends.output.writer import atomic_write_text, write_json

logger = logging.getLogger(__name__)

KEY_COLUMNS = ["p", "s", "a", "T", "K", "method"]


def pool_results(results: Sequence[ExperimentResult]) -> List[ExperimentResult]:
    """Merge results for the same grid point into one with combined N."""
    if not results:
        raise InputError("no Monte Carlo results to tabulate")
    frame = pd.DataFrame([r.model_dump() for r in results])
    frame["hits"] = frame["freq_correct"] * frame["n_reps"]
    frame["abs_err"] = frame["mae"] * frame["n_reps"]
    pooled = frame.groupby(KEY_COLUMNS, sort=True, as_index=False)[["n_reps", "n_failed", "hits", "abs_err"]].sum()

    out: List[ExperimentResult] = []
    for row in pooled.itertuples(index=False):
        n = int(row.n_reps)
        out.append(
            ExperimentResult(
                p=int(row.p),
                s=int(row.s),
                a=float(row.a),
                T=int(row.T),
                K=int(row.K),
                method=row.method,
                n_reps=n,
                n_failed=int(row.n_failed),
                freq_correct=float(np.clip(row.hits / n, 0.0, 1.0)) if n else 0.0,
                mae=float(row.abs_err / n) if n else 0.0,
            )
        )
    return out


def shape_tables(results: Sequence[ExperimentResult]) -> Dict[str, pd.DataFrame]:
    """
    Frequency-of-correct-selection and MAE tables.

    Rows are (p, T/p); columns are (method, a, s). Each table has a matching
    table of Monte Carlo standard errors.
    """
    frame = pd.DataFrame([r.model_dump() for r in pool_results(results)])
    frame["T_over_p"] = frame["T"] // frame["p"]
    tables: Dict[str, pd.DataFrame] = {}
    for name, column in (("freq", "freq_correct"), ("freq_se", "mc_se"), ("mae", "mae")):
        table = frame.pivot_table(
            index=["p", "T_over_p"],
            columns=["method", "a", "s"],
            values=column,
            aggfunc="first",
        )
        table = table.sort_index(axis=1, level=["method", "a", "s"], ascending=[True, False, True])
        table.columns = [f"{m}|a={a:g}|s={s}" for m, a, s in table.columns]
        tables[name] = table
    return tables


def emit_tables(results: Sequence[ExperimentResult], out_dir: str | Path) -> List[Path]:
    """
    Write the pooled results as CSV and JSON.

    Files: freq.csv, freq_se.csv, mae.csv (wide tables) and results.csv,
    results.json (one pooled row per grid point and method).

    Raises:
        InputError: results is empty
    """
    out_dir = Path(out_dir)
    pooled = pool_results(results)
    paths: List[Path] = []
    for name, table in shape_tables(pooled).items():
        paths.append(atomic_write_text(out_dir / f"{name}.csv", table.to_csv(float_format="%.4f")))

    long = pd.DataFrame([r.model_dump(mode="json") for r in pooled])
    paths.append(atomic_write_text(out_dir / "results.csv", long.to_csv(index=False)))
    paths.append(write_json(out_dir / "results.json", [r.model_dump(mode="json") for r in pooled]))
    logger.info(f"Wrote {len(paths)} table files to {out_dir}")
    return paths
