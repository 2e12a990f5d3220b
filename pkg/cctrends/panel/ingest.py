from pathlib import Path
from typing import List, Optional
import logging

import numpy as np
import pandas as pd

from cctrends.errors import AnalysisError, DimensionError, InputError, MissingValueError, ParseError
from cctrends.models.types import Provenance, TimeSeriesPanel
from cctrends.output.writer import atomic_write_text

logger = logging.getLogger(__name__)


def ingest_csv(
    path: str | Path,
    columns: Optional[List[str]] = None,
    time_column: Optional[str] = None,
) -> TimeSeriesPanel:
    """
    Read a panel from a CSV file with a header row.

    One row per time point in increasing time order, comma separated,
    decimal point. A time-stamp column may be named and is dropped; the
    analysis is index based.

    Args:
        path: CSV file
        columns: Optional subset of header names to keep, in this order
        time_column: Optional header name of a time-stamp column to drop

    Returns:
        TimeSeriesPanel with labels from the header and empty provenance

    Raises:
        InputError: File missing or unknown column requested
        MissingValueError: Empty cell, naming its row and column
        ParseError: Cell that is not a finite real number
        DimensionError: Fewer than 2 data rows
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"CSV file not found: {path}")

    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise DimensionError(f"{path} is empty")
    except Exception as e:
        raise ParseError(f"Failed to read {path}: {e}")

    if time_column is not None:
        if time_column not in frame.columns:
            raise InputError(f"time column '{time_column}' not in header of {path}")
        frame = frame.drop(columns=[time_column])

    if columns:
        unknown = [c for c in columns if c not in frame.columns]
        if unknown:
            raise InputError(f"columns {unknown} not in header of {path}")
        frame = frame[list(columns)]

    if len(frame) < 2:
        raise DimensionError(f"{path} has {len(frame)} data rows, at least 2 are required")
    if frame.shape[1] < 1:
        raise DimensionError(f"{path} has no data columns")

    try:
        values = np.empty(frame.shape, dtype=float)
        for j, name in enumerate(frame.columns):
            raw = frame[name].str.strip()
            # Line numbers count the header as line 1
            empty = raw == ""
            if empty.any():
                row = int(np.flatnonzero(empty.to_numpy())[0])
                raise MissingValueError(
                    f"missing value at line {row + 2}, column '{name}' of {path}"
                )
            parsed = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=float)
            bad = ~np.isfinite(parsed)
            if bad.any():
                row = int(np.flatnonzero(bad)[0])
                raise ParseError(
                    f"non-numeric value '{raw.iloc[row]}' at line {row + 2}, column '{name}' of {path}"
                )
            values[:, j] = parsed
    except AnalysisError:
        raise
    except Exception as e:
        raise ParseError(f"Failed to parse {path}: {e}")

    logger.info(f"Read {values.shape[0]}×{values.shape[1]} panel from {path}")
    return TimeSeriesPanel(
        values=values,
        labels=[str(c) for c in frame.columns],
        provenance=Provenance(source=str(path)),
    )


def write_csv(panel: TimeSeriesPanel, path: str | Path) -> Path:
    """Write the panel with a header row; a recorded X_0 goes first, so reading back restores it."""
    values = np.asarray(panel.values)
    if panel.t0_row is not None:
        values = np.vstack([panel.x0(), values])
    frame = pd.DataFrame(values, columns=panel.labels)
    return atomic_write_text(path, frame.to_csv(index=False, float_format="%.17g"))
