"""Trend-count estimators: max-gap, argmax criteria f1/f2/f3 and sequential F tests."""

from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np

from cctrends.errors import DimensionError, InputError
from cctrends.models.types import (
    CountMethod,
    CriterionPoint,
    LimitLawCatalog,
    Norm,
    SequentialStep,
    TrendCountEstimate,
)

logger = logging.getLogger(__name__)

FLOOR = 1e-300
TIE_RTOL = 1e-12


def _check_spectrum(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.size == 0:
        raise DimensionError("empty eigenvalue vector")
    if np.any(np.diff(lam) > 1e-12):
        raise InputError(f"eigenvalues must be sorted non-increasing, got {lam.tolist()}")
    if lam.min() < -1e-12 or lam.max() > 1 + 1e-12:
        raise InputError("eigenvalues must lie in [0, 1]")
    return np.clip(lam, 0.0, 1.0)


def _argmax(indices: Sequence[int], values: np.ndarray) -> Tuple[int, List[int]]:
    """Smallest maximizing index and the full tie set."""
    best = np.max(values)
    ties = [
        int(i)
        for i, v in zip(indices, values)
        if v == best or np.isclose(v, best, rtol=TIE_RTOL, atol=0.0)
    ]
    return ties[0], ties


def max_gap(lam, p: Optional[int] = None) -> TrendCountEstimate:
    """argmax_{i=0..p} (λ_i − λ_{i+1}) with λ₀ = 1 and λ_{p+1} = 0."""
    lam = _check_spectrum(lam)
    if p is not None and p != lam.size:
        raise DimensionError(f"{lam.size} eigenvalues for p={p}")
    ext = np.concatenate(([1.0], lam, [0.0]))
    gaps = ext[:-1] - ext[1:]
    indices = list(range(lam.size + 1))
    s_hat, ties = _argmax(indices, gaps)
    return TrendCountEstimate(
        s_hat=s_hat,
        p=lam.size,
        method=CountMethod.MAX_GAP,
        tie_set=ties,
        criterion=[CriterionPoint(index=i, value=float(g)) for i, g in zip(indices, gaps)],
    )


def _f1(lam: np.ndarray, T: int, K: int) -> Tuple[List[int], np.ndarray]:
    p = lam.size
    log_num = np.log(np.maximum(lam, FLOOR))
    log_den = np.log(np.maximum((T / K) * lam, FLOOR))
    # log f1(i) = Σ_{h≤i} log λ_h − Σ_{h>i} log((T/K)λ_h)
    head = np.concatenate(([0.0], np.cumsum(log_num)))
    tail = np.concatenate((np.cumsum(log_den[::-1])[::-1], [0.0]))
    return list(range(p + 1)), head - tail


def _f2(lam: np.ndarray, include_zero: bool) -> Tuple[List[int], np.ndarray]:
    p = lam.size
    ext = np.concatenate(([1.0], lam))
    indices = list(range(0 if include_zero else 1, p))
    if not indices:
        raise DimensionError(f"f2 needs p ≥ 2 (admissible set I2 = {{1..p−1}} is empty for p={p})")
    values = np.array([ext[i] / max(ext[i + 1], FLOOR) for i in indices])
    return indices, values


def _f3(lam: np.ndarray, include_zero: bool) -> Tuple[List[int], np.ndarray]:
    p = lam.size
    ext = np.concatenate(([1.0], lam))
    # tails[j] = Σ_{h≥j} λ_h for j = 1..p+1
    tails = np.zeros(p + 2)
    tails[1 : p + 1] = np.cumsum(lam[::-1])[::-1]
    indices = list(range(0 if include_zero else 1, p - 1))
    if not indices:
        admissible = "I3⁰ = {0..p−2}" if include_zero else "I3 = {1..p−2}"
        raise DimensionError(f"f3 admissible set {admissible} is empty for p={p}")

    def g(i: int) -> float:
        return np.log1p(ext[i] / max(tails[i + 1], FLOOR))

    values = np.array([g(i) / max(g(i + 1), FLOOR) for i in indices])
    return indices, values


def argmax_criteria(
    lam,
    T: Optional[int] = None,
    K: Optional[int] = None,
    which: CountMethod | str = CountMethod.F1,
    include_zero: bool = False,
) -> TrendCountEstimate:
    """
    Argmax estimators over the admissible index sets.

    f1(i) = Π_{h≤i}λ_h / Π_{h>i}(T/K)λ_h on {0..p}, evaluated in log space.
    f2(i) = λ_i/λ_{i+1} on {1..p−1}.
    f3(i) = log(1 + λ_i/S_{i+1}) / log(1 + λ_{i+1}/S_{i+2}) on {1..p−2},
    with S_j = Σ_{h≥j}λ_h.
    include_zero adds i = 0 with λ₀ = 1 to the f2 and f3 sets.
    """
    lam = _check_spectrum(lam)
    which = CountMethod(which)
    if which is CountMethod.F1:
        if T is None or K is None:
            raise InputError("f1 needs T and K")
        indices, values = _f1(lam, T, K)
        points = np.exp(values)
    elif which is CountMethod.F2:
        indices, values = _f2(lam, include_zero)
        points = values
    elif which is CountMethod.F3:
        indices, values = _f3(lam, include_zero)
        points = values
    else:
        raise InputError(f"'{which.value}' is not an argmax criterion")

    s_hat, ties = _argmax(indices, values)
    return TrendCountEstimate(
        s_hat=s_hat,
        p=lam.size,
        method=which,
        tie_set=ties,
        criterion=[CriterionPoint(index=i, value=float(v)) for i, v in zip(indices, points)],
    )


def f_statistic(lam, j: int, norm: Norm | str, K: int) -> float:
    """F_{j,1} = Kπ²Σ_{i≤j}(1 − λ_i) or F_{j,∞} = Kπ²(1 − λ_j)."""
    lam = np.asarray(lam, dtype=float).ravel()
    if not 1 <= j <= lam.size:
        raise DimensionError(f"j={j} outside 1..{lam.size}")
    if Norm(norm) is Norm.ONE:
        return float(K * np.pi**2 * np.sum(1.0 - lam[:j]))
    return float(K * np.pi**2 * (1.0 - lam[j - 1]))


def f_statistic_max(spectra: Sequence[Tuple[int, np.ndarray]], j: int, norm: Norm | str) -> float:
    """max over a K grid of F_{j,n}; spectra holds (K_i, λ at K_i) pairs."""
    if not spectra:
        raise DimensionError("empty K grid")
    return max(f_statistic(lam, j, norm, K) for K, lam in spectra)


def sequential_select(
    lam,
    K: int,
    tables: LimitLawCatalog,
    norm: Norm | str = Norm.INFINITY,
    eta: float = 0.05,
    spectra: Optional[Sequence[Tuple[int, np.ndarray]]] = None,
) -> TrendCountEstimate:
    """
    Test H₀: s = j for j = p, p−1, …, 1 and stop at the first non-rejection.

    H₀ is rejected when F_{j,n} exceeds the (1−η)-quantile of ‖ζ^(j)‖_n.
    Returns 0 when every hypothesis is rejected. When spectra over a K grid
    are given, F_{j,n} is the maximum over the grid.

    Raises:
        TableError: No quantile for some j that is tested
    """
    lam = _check_spectrum(lam)
    norm = Norm(norm)
    p = lam.size
    method = CountMethod.SEQ_F1 if norm is Norm.ONE else CountMethod.SEQ_FINF

    trajectory: List[SequentialStep] = []
    s_hat = 0
    for j in range(p, 0, -1):
        crit = tables.table(j).quantile(norm, eta)
        if spectra:
            stat = f_statistic_max(spectra, j, norm)
        else:
            stat = f_statistic(lam, j, norm, K)
        rejected = stat > crit
        trajectory.append(SequentialStep(j=j, statistic=stat, critical_value=crit, rejected=rejected))
        if not rejected:
            s_hat = j
            break

    logger.debug(f"[sequential_select] {method.value}: s_hat={s_hat} after {len(trajectory)} tests")
    return TrendCountEstimate(
        s_hat=s_hat,
        p=p,
        method=method,
        tie_set=[s_hat],
        trajectory=trajectory,
    )


def min_series(method: CountMethod | str, include_zero: bool = False) -> int:
    """Smallest panel dimension p for which the method's index set is non-empty."""
    method = CountMethod(method)
    if method is CountMethod.F2:
        return 1 if include_zero else 2
    if method is CountMethod.F3:
        return 2 if include_zero else 3
    return 1


def count_trends(
    lam,
    method: CountMethod | str = CountMethod.MAX_GAP,
    T: Optional[int] = None,
    K: Optional[int] = None,
    tables: Optional[LimitLawCatalog] = None,
    eta: float = 0.05,
    include_zero: bool = False,
) -> TrendCountEstimate:
    """Dispatch to the estimator named by method."""
    method = CountMethod(method)
    if method is CountMethod.MAX_GAP:
        return max_gap(lam)
    if method in (CountMethod.F1, CountMethod.F2, CountMethod.F3):
        return argmax_criteria(lam, T=T, K=K, which=method, include_zero=include_zero)
    if tables is None or K is None:
        raise InputError(f"{method.value} needs K and limit-law tables")
    norm = Norm.ONE if method is CountMethod.SEQ_F1 else Norm.INFINITY
    return sequential_select(lam, K, tables, norm=norm, eta=eta)
