from pathlib import Path
from typing import List

import numpy as np
import pandas as pd

from cctrends.models.types import AnalysisReport, MisspecDiagnostic
from cctrends.output.writer import atomic_write_text
from cctrends.trends.misspec import stripe_bounds


def loglog_frame(diag: MisspecDiagnostic | None) -> pd.DataFrame:
    """logK, logStat, stripeLow, stripeHigh per grid point."""
    columns = ["logK", "logStat", "stripeLow", "stripeHigh"]
    if diag is None:
        return pd.DataFrame(columns=columns)
    rows = []
    for K, (log_k, log_stat) in zip(diag.k_grid.values, diag.log_points):
        low, high = stripe_bounds(np.asarray(diag.stripe_center), diag.stripe_delta, diag.norm, K)
        rows.append((log_k, log_stat, low, high))
    return pd.DataFrame(rows, columns=columns)


def write_plot_data(report: AnalysisReport, out_dir: str | Path, prefix: str = "") -> List[Path]:
    """
    Data-only plot files:

    - eigenvalues.csv: index,eigenvalue
    - loglog.csv: logK,logStat,stripeLow,stripeHigh
    - gaps.csv: i,gap with λ₀ = 1 and λ_{p+1} = 0
    """
    out_dir = Path(out_dir)
    lam = np.asarray(report.eigenvalues)
    ext = np.concatenate(([1.0], lam, [0.0]))

    eigen = pd.DataFrame({"index": np.arange(1, lam.size + 1), "eigenvalue": lam})
    gaps = pd.DataFrame({"i": np.arange(lam.size + 1), "gap": ext[:-1] - ext[1:]})
    loglog = loglog_frame(report.misspec)

    return [
        atomic_write_text(out_dir / f"{prefix}eigenvalues.csv", eigen.to_csv(index=False)),
        atomic_write_text(out_dir / f"{prefix}loglog.csv", loglog.to_csv(index=False)),
        atomic_write_text(out_dir / f"{prefix}gaps.csv", gaps.to_csv(index=False)),
    ]
