from concurrent.futures import ThreadPoolExecutor
from os import cpu_count
from typing import List, Optional, Tuple
import logging

import numpy as np

from cctrends.basis.design import build_design
from cctrends.cca.core import cca
from cctrends.errors import DimensionError
from cctrends.models.types import KGrid, LimitLawTable, Location, MisspecDiagnostic, Norm

logger = logging.getLogger(__name__)

FLOOR = 1e-300


def pivotal_tau(lam, s: int) -> np.ndarray:
    """τ^(s) = (1 − λ_s, …, 1 − λ_1), ordered like ζ^(s)."""
    lam = np.asarray(lam, dtype=float)
    return np.maximum(1.0 - lam[:s][::-1], 0.0)


def _norm(v: np.ndarray, norm: Norm) -> float:
    return float(np.sum(np.abs(v)) if norm is Norm.ONE else np.max(np.abs(v)))


def stripe_bounds(center: np.ndarray, delta: float, norm: Norm | str, K: int) -> Tuple[float, float]:
    """
    Band for log‖π²τ‖_n at K implied by the stripe log(Kπ²τ) ∈ center ± δ.

    Exact for both norms: each is increasing in every coordinate and scales by
    e^{±δ} with them, so the bounds are the images of the stripe corners
    exp(center ∓ δ).
    """
    level = np.log(_norm(np.exp(np.asarray(center)), Norm(norm))) - np.log(K)
    return level - delta, level + delta


def misspec_diagnostic(
    panel,
    s: int,
    k_grid: KGrid,
    norm: Norm | str,
    table: LimitLawTable,
    eta: float = 0.05,
    location: Location | str = Location.MEAN,
    max_workers: Optional[int] = None,
) -> MisspecDiagnostic:
    """
    Log-log diagnostic and confidence stripe for the pivotal statistic.

    For every K_i in the grid the canonical correlations are recomputed with
    a KL basis of K_i functions, giving τ^(s) and the point
    (log K_i, log‖π²τ^(s)‖_n). Under correct specification the points lie on
    a line of slope −1. At the base K the stripe test checks
    ‖log(Kπ²τ^(s)) − center‖_∞ < δ.

    Raises:
        DimensionError: s = 0 (τ is empty) or s > p
        TableError: The table has no stripe width for eta
    """
    x = np.asarray(getattr(panel, "values", panel), dtype=float)
    T, p = x.shape
    norm = Norm(norm)
    location = Location(location)
    if s < 1:
        raise DimensionError("the misspecification diagnostic needs s ≥ 1 (τ^(0) is empty)")
    if s > p:
        raise DimensionError(f"s={s} exceeds p={p}")
    if table.s != s:
        raise DimensionError(f"limit-law table is for s={table.s}, diagnostic needs s={s}")

    Ks = k_grid.values

    def spectrum(K: int) -> np.ndarray:
        return np.asarray(cca(x, build_design(K, T)).eigenvalues)

    workers = max_workers or min(cpu_count() or 1, len(Ks))
    with ThreadPoolExecutor(max_workers=workers) as executor:
        spectra = list(executor.map(spectrum, Ks))

    tau: List[np.ndarray] = [pivotal_tau(lam, s) for lam in spectra]
    log_points = [
        (float(np.log(K)), float(np.log(max(_norm(np.pi**2 * t, norm), FLOOR))))
        for K, t in zip(Ks, tau)
    ]
    slope = None
    if len(log_points) >= 2 and len(set(Ks)) >= 2:
        xs, ys = zip(*log_points)
        slope = float(np.polyfit(xs, ys, 1)[0])

    center = np.asarray(table.median_log if location is Location.MEDIAN else table.mean_log)
    delta = table.delta(eta, location)
    stat = np.log(np.maximum(Ks[0] * np.pi**2 * tau[0], FLOOR))
    distance = float(np.max(np.abs(stat - center)))

    logger.debug(f"[misspec_diagnostic] slope={slope}, distance={distance:.4f}, delta={delta:.4f}")
    return MisspecDiagnostic(
        k_grid=k_grid,
        s=s,
        norm=norm,
        eta=eta,
        location=location,
        tau=tau,
        log_points=log_points,
        fitted_slope=slope,
        stripe_center=center,
        stripe_delta=delta,
        stripe_distance=distance,
        inside_stripe=distance < delta,
    )
