from typing import List
import logging

import numpy as np

from cctrends.errors import DimensionError, InputError
from cctrends.models.types import InitMode, Provenance, SelectionMatrix, TimeSeriesPanel

logger = logging.getLogger(__name__)


def _update_provenance(provenance: Provenance, changes: dict) -> Provenance:
    return Provenance.model_validate({**provenance.model_dump(), **changes})


def preprocess(
    panel: TimeSeriesPanel,
    log: bool = False,
    normalize_start: bool = False,
    init_mode: InitMode | str = InitMode.LEVELS,
) -> TimeSeriesPanel:
    """
    Apply log → normalize_start → init_mode, in that order.

    normalize_start subtracts the first row. "difference-from-start" gives
    x_t = X_t − X_0 with the first row as X_0, so the first row becomes zero
    and X_0 is recorded as zero. "levels" keeps x_t = X_t and records the first
    row as X_0 unless the panel already carries one.

    Raises:
        InputError: Non-positive value under the log flag
    """
    init_mode = InitMode(init_mode)
    values = np.array(panel.values, dtype=float)
    t0 = None if panel.t0_row is None else np.array(panel.t0_row, dtype=float)
    steps: List[str] = list(panel.provenance.steps)

    if log:
        if np.any(values <= 0):
            row, col = np.argwhere(values <= 0)[0]
            raise InputError(
                f"log transform needs positive values, got {values[row, col]} "
                f"at row {row + 1}, series '{panel.labels[col]}'"
            )
        values = np.log(values)
        if t0 is not None:
            if np.any(t0 <= 0):
                raise InputError("log transform needs a positive X_0 row")
            t0 = np.log(t0)
        steps.append("log")

    if normalize_start:
        start = values[0].copy()
        values = values - start
        if t0 is not None:
            t0 = t0 - start
        steps.append("normalize_start")

    if init_mode is InitMode.DIFFERENCE:
        values = values - values[0]
        t0 = np.zeros(panel.p)
    elif t0 is None:
        t0 = values[0].copy()
    steps.append(f"init_mode={init_mode.value}")

    provenance = _update_provenance(
        panel.provenance,
        {
            "log": panel.provenance.log or log,
            "normalize_start": panel.provenance.normalize_start or normalize_start,
            "init_mode": init_mode,
            "steps": steps,
        },
    )
    logger.debug(f"[preprocess] {steps}")
    return TimeSeriesPanel(values=values, labels=panel.labels, t0_row=t0, provenance=provenance)


def _selection_labels(labels: List[str], H: SelectionMatrix) -> List[str]:
    out: List[str] = []
    for j in range(H.m):
        members = [labels[i] for i in np.flatnonzero(np.abs(H.H[:, j]) > 0)]
        if H.kind == "subset" and len(members) == 1:
            out.append(members[0])
        elif H.kind == "aggregate":
            out.append("+".join(members))
        else:
            out.append(f"h{j + 1}")
    return out


def apply_selection(panel: TimeSeriesPanel, H: SelectionMatrix) -> TimeSeriesPanel:
    """
    Return the panel H′x_t (values·H, T×m).

    Subset columns keep their names, aggregate columns join their members
    with '+', custom columns are named h1..hm.

    Raises:
        DimensionError: H does not have p rows
    """
    if H.p != panel.p:
        raise DimensionError(f"selection matrix has {H.p} rows, panel has {panel.p} series")

    Hm = np.asarray(H.H)
    values = np.asarray(panel.values) @ Hm
    t0 = None if panel.t0_row is None else np.asarray(panel.t0_row) @ Hm

    prior = panel.provenance.selection
    composed = Hm if prior is None else np.asarray(prior) @ Hm
    kind = H.kind if panel.provenance.selection_kind in (None, H.kind) else "custom"
    provenance = _update_provenance(
        panel.provenance,
        {
            "selection": composed,
            "selection_kind": kind,
            "steps": [*panel.provenance.steps, f"select:{H.kind}:{H.m}"],
        },
    )
    return TimeSeriesPanel(
        values=values,
        labels=_selection_labels(panel.labels, H),
        t0_row=t0,
        provenance=provenance,
    )


def split_initial_row(panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """
    Take the first row out of the sample as X_0; the sample becomes rows 1..T.

    Run after preprocess, so X_0 is the transformed first row: the raw first
    observation in "levels" mode, zero in "difference-from-start" mode.

    Raises:
        DimensionError: Fewer than 3 rows, leaving under 2 for the sample
    """
    values = np.asarray(panel.values)
    if values.shape[0] < 3:
        raise DimensionError(f"need at least 3 rows (X_0 plus 2 observations), got {values.shape[0]}")
    provenance = _update_provenance(
        panel.provenance,
        {
            "raw_rows": panel.provenance.raw_rows or values.shape[0],
            "steps": [*panel.provenance.steps, "x0=first row"],
        },
    )
    return TimeSeriesPanel(
        values=values[1:],
        labels=panel.labels,
        t0_row=values[0],
        provenance=provenance,
    )
