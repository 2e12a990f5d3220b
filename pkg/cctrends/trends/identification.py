from itertools import combinations
from typing import List, Optional
import logging

import numpy as np

from cctrends.cca.core import cca
from cctrends.errors import DimensionError, IdentificationError
from cctrends.models.types import (
    BasisMatrix,
    CountMethod,
    IdentificationDecision,
    LimitLawCatalog,
)
from cctrends.trends.count import count_trends, min_series

logger = logging.getLogger(__name__)


def _values(panel) -> np.ndarray:
    values = getattr(panel, "values", panel)
    return np.asarray(values, dtype=float)


def identification_check(
    panel,
    b,
    d: BasisMatrix,
    method: CountMethod | str = CountMethod.MAX_GAP,
    s_full: Optional[int] = None,
    tables: Optional[LimitLawCatalog] = None,
    eta: float = 0.05,
    include_zero: bool = False,
) -> IdentificationDecision:
    """
    Decide whether b′ψ is nonsingular from trend counts.

    Counts ŝ(x) on the panel and ŝ(b′x) on the transformed panel and rejects
    when ŝ(b′x) < ŝ(x).

    Args:
        panel: TimeSeriesPanel or T×p array
        b: p×s matrix of full column rank
        d: Basis matching the panel length
        method: Trend-count method used for both counts; max-gap counts b′x
            when b has too few columns for it
        s_full: Count of the full panel when already known

    Raises:
        DimensionError: b has the wrong row count or is rank deficient
    """
    x = _values(panel)
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b.reshape(-1, 1)
    if b.shape[0] != x.shape[1]:
        raise DimensionError(f"b has {b.shape[0]} rows, panel has {x.shape[1]} series")
    if b.shape[1] == 0:
        raise DimensionError("b has no columns; there is nothing to identify")
    if np.linalg.matrix_rank(b) < b.shape[1]:
        raise DimensionError("b is not of full column rank")

    method = CountMethod(method)
    kwargs = dict(T=d.T, K=d.K, tables=tables, eta=eta, include_zero=include_zero)
    if s_full is None:
        s_full = count_trends(cca(x, d).eigenvalues, method=method, **kwargs).s_hat

    used = method
    if b.shape[1] < min_series(method, include_zero):
        used = CountMethod.MAX_GAP
        logger.info(
            f"{method.value} has no admissible index for {b.shape[1]} series; "
            f"counting b′x with {used.value}"
        )
    s_transformed = count_trends(cca(x @ b, d).eigenvalues, method=used, **kwargs).s_hat

    accept = s_transformed >= s_full
    logger.debug(f"[identification_check] ŝ(x)={s_full}, ŝ(b′x)={s_transformed}, accept={accept}")
    return IdentificationDecision(
        accept=accept,
        s_full=s_full,
        s_transformed=s_transformed,
        method=used,
    )


def search_identification(
    panel,
    d: BasisMatrix,
    s: int,
    method: CountMethod | str = CountMethod.MAX_GAP,
    preferred: Optional[List[int]] = None,
    max_candidates: int = 500,
    max_alternatives: int = 10,
    **kwargs,
) -> IdentificationDecision:
    """
    Pick coordinate columns for b by the identification rule.

    The preferred columns are tried first; otherwise combinations of s
    columns are tried in column order. The first accepted choice is returned
    with up to max_alternatives other accepted choices.

    Raises:
        IdentificationError: No candidate is accepted
    """
    x = _values(panel)
    p = x.shape[1]
    if not 1 <= s <= p:
        raise DimensionError(f"s={s} outside 1..{p}")

    def unit_columns(cols) -> np.ndarray:
        b = np.zeros((p, s))
        b[list(cols), range(s)] = 1.0
        return b

    if preferred is not None:
        decision = identification_check(x, unit_columns(preferred), d, method, s_full=s, **kwargs)
        if decision.accept:
            return decision.model_copy(update={"b_columns": list(preferred)})
        logger.warning(
            f"columns {[c + 1 for c in preferred]} fail the identification check "
            f"(ŝ(b′x)={decision.s_transformed} < {s}); searching coordinate choices"
        )

    chosen: Optional[IdentificationDecision] = None
    alternatives: List[List[int]] = []
    for n, cols in enumerate(combinations(range(p), s)):
        if n >= max_candidates or len(alternatives) >= max_alternatives:
            break
        if preferred is not None and list(cols) == list(preferred):
            continue
        decision = identification_check(x, unit_columns(cols), d, method, s_full=s, **kwargs)
        if not decision.accept:
            continue
        if chosen is None:
            chosen = decision.model_copy(update={"b_columns": list(cols)})
        else:
            alternatives.append(list(cols))

    if chosen is None:
        raise IdentificationError(
            f"no choice of {s} coordinate columns passed the identification check "
            f"(tried up to {max_candidates})"
        )
    logger.warning(
        f"identification by greedy search: b = columns {[c + 1 for c in chosen.b_columns]}"
        + (f", {len(alternatives)} alternatives accepted" if alternatives else "")
    )
    return chosen.model_copy(update={"alternatives": alternatives})
