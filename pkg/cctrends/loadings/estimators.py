"""One-step and iterated canonical correlation (ICC) estimators of ψ and β."""

from typing import List, Optional, Tuple
import logging

import numpy as np
from scipy import linalg

from cctrends.cca.core import basis_factor, cca, check_definite, moment
from cctrends.errors import DimensionError, IdentificationError
from cctrends.models.types import (
    BasisMatrix,
    CcaResult,
    IdentificationPair,
    LoadingEstimate,
)

logger = logging.getLogger(__name__)

RCOND_MIN = 1e-12
ZERO_RTOL = 1e-12


def panel_data(x, x0=None) -> Tuple[np.ndarray, np.ndarray]:
    """(T×p values, X_0 row) from a panel or a bare array; X_0 defaults to zero."""
    if hasattr(x, "values") and hasattr(x, "x0"):
        values = np.asarray(x.values, dtype=float)
        start = x.x0() if x0 is None else x0
    else:
        values = np.asarray(x, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        start = np.zeros(values.shape[1]) if x0 is None else x0
    return values, np.asarray(start, dtype=float)


def first_difference(x: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """Δx_t = x_t − x_{t−1} with Δx_1 = x_1 − x_0."""
    return np.diff(np.vstack([x0[None, :], x]), axis=0)


def _solve_normalized(N: np.ndarray, A: np.ndarray, what: str) -> np.ndarray:
    """A·N⁻¹ after a reciprocal-condition check on N."""
    if N.size == 0:
        return A
    cond = np.linalg.cond(N)
    if not np.isfinite(cond) or 1.0 / cond < RCOND_MIN:
        raise IdentificationError(
            f"normalization matrix {what} is singular (condition number {cond:.3e}); "
            "run the identification check to choose b or c"
        )
    return linalg.solve(N.T, A.T).T


def complement(b) -> np.ndarray:
    """
    Orthonormal basis c of (col b)⊥, so c′b = 0 and c′c = I.

    Raises:
        DimensionError: b is rank deficient
    """
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b.reshape(-1, 1)
    p, s = b.shape
    if s == 0:
        return np.eye(p)
    if np.linalg.matrix_rank(b) < s:
        raise DimensionError(f"b ({p}×{s}) is not of full column rank")
    return linalg.null_space(b.T)


def identification_from_b(b) -> IdentificationPair:
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b.reshape(-1, 1)
    return IdentificationPair(b=b, c=complement(b))


def identification_from_c(c) -> IdentificationPair:
    """b = c⊥; the roles of (ψ, b) and (β, c) are interchangeable."""
    c = np.asarray(c, dtype=float)
    if c.ndim == 1:
        c = c.reshape(-1, 1)
    return IdentificationPair(b=complement(c), c=c)


def coordinate_pair(p: int, b_columns: Optional[List[int]] = None, c_columns: Optional[List[int]] = None) -> IdentificationPair:
    """Pair built from 0-based unit columns for b or for c."""
    if (b_columns is None) == (c_columns is None):
        raise DimensionError("give exactly one of b columns or c columns")
    cols = b_columns if b_columns is not None else c_columns
    unit = np.zeros((p, len(cols)))
    for j, i in enumerate(cols):
        if not 0 <= i < p:
            raise DimensionError(f"column {i + 1} outside 1..{p}")
        unit[i, j] = 1.0
    return identification_from_b(unit) if b_columns is not None else identification_from_c(unit)


def _estimate(
    M: np.ndarray,
    result: CcaResult,
    s: int,
    pair: IdentificationPair,
    method: str,
    iterations: int = 1,
    converged: bool = True,
    step_norms: Optional[List[float]] = None,
) -> LoadingEstimate:
    """ψ̂ = M V₁(b′M V₁)⁻¹ and β̂ = V₀(c′V₀)⁻¹ with their unrestricted blocks."""
    p = M.shape[0]
    if pair.p != p or pair.s != s:
        raise DimensionError(f"identification pair is for p={pair.p}, s={pair.s}; need p={p}, s={s}")
    V = np.asarray(result.eigenvectors)
    V1, V0 = V[:, :s], V[:, s:]
    b, c = np.asarray(pair.b), np.asarray(pair.c)

    MV1 = M @ V1
    psi_hat = _solve_normalized(b.T @ MV1, MV1, "b′M V₁")
    beta_hat = _solve_normalized(c.T @ V0, V0, "c′V₀")

    psi_star = pair.c_bar().T @ psi_hat
    beta_star = pair.b_bar().T @ beta_hat
    return LoadingEstimate(
        method=method,
        psi_hat=psi_hat,
        beta_hat=beta_hat,
        psi_star=psi_star,
        beta_star=beta_star,
        iterations=iterations,
        converged=converged,
        step_norms=step_norms or [],
        pair=pair,
    )


def one_step(x, d: BasisMatrix, result: CcaResult, s: int, pair: IdentificationPair) -> LoadingEstimate:
    """
    One-step estimators from the canonical correlations of x.

    ψ̂ = M_xx V̂₁(b′M_xx V̂₁)⁻¹ and β̂ = V̂₀(c′V̂₀)⁻¹. Both are invariant to
    rescaling the eigenvectors.

    Raises:
        IdentificationError: b′M_xxV̂₁ or c′V̂₀ is singular
    """
    values, _ = panel_data(x)
    if not 0 <= s <= values.shape[1]:
        raise DimensionError(f"s={s} outside [0, {values.shape[1]}]")
    return _estimate(moment(values, values), result, s, pair, "one-step")


def residualize(x, d: BasisMatrix, psi, x0=None) -> np.ndarray:
    """
    e_t(ψ) = x_t − M_xg M_gg⁻¹ g_t with g_t = ψ′M_{Δxd}M_dd⁻¹d_t.

    Δx_1 = x_1 − x_0 with x_0 the stored X_0 row (zero if absent). Returns x
    unchanged when ψ is empty or the fitted g is numerically zero.

    Raises:
        ConditioningError: M_gg is singular
    """
    values, start = panel_data(x, x0)
    psi = np.asarray(psi, dtype=float)
    if psi.ndim == 1:
        psi = psi.reshape(-1, 1)
    if psi.size == 0 or psi.shape[1] == 0:
        return values.copy()

    D = np.asarray(d.values)
    factor, _ = basis_factor(d)
    dx = first_difference(values, start)
    fitted = moment(dx, D).T @ psi
    # Rounding noise only: differences orthogonal to the basis
    if np.abs(fitted).max() <= ZERO_RTOL * np.sqrt(np.mean(dx**2)) * np.abs(psi).max():
        return values.copy()
    G = D @ linalg.cho_solve(factor, fitted)

    Mgg = moment(G, G)
    check_definite(Mgg, "M_gg")
    return values - G @ linalg.cho_solve(linalg.cho_factor(Mgg, lower=True), moment(G, values))


def icc_step(x, d: BasisMatrix, psi_prev, s: int, pair: IdentificationPair, x0=None) -> LoadingEstimate:
    """One ICC update: canonical correlations of e_t(ψ̂^(j−1)), normalized with M_ee."""
    e = residualize(x, d, psi_prev, x0)
    return _estimate(moment(e, e), cca(e, d), s, pair, "icc")


def icc(
    x,
    d: BasisMatrix,
    s: int,
    pair: IdentificationPair,
    tol: float = 1e-10,
    max_iter: int = 50,
    x0=None,
    psi_init=None,
) -> LoadingEstimate:
    """
    Iterated canonical correlation estimators.

    Starts from the one-step estimate (or psi_init) and repeats icc_step
    until ‖ψ̂^(j) − ψ̂^(j−1)‖_F < tol or max_iter estimates have been formed.
    Each update depends on the previous iterate only through its column span.

    Returns:
        The converged estimate, or the iterate with the smallest step norm
        flagged converged=False
    """
    if tol <= 0:
        raise DimensionError(f"tol must be positive, got {tol}")
    if max_iter < 2:
        raise DimensionError(f"max_iter must be at least 2, got {max_iter}")

    values, start = panel_data(x, x0)
    if psi_init is None:
        current = one_step(values, d, cca(values, d), s, pair)
        psi = np.asarray(current.psi_hat)
    else:
        psi = np.asarray(psi_init, dtype=float)

    step_norms: List[float] = []
    best: Optional[LoadingEstimate] = None
    best_norm = np.inf
    for j in range(2, max_iter + 1):
        new = icc_step(values, d, psi, s, pair, start)
        step = float(np.linalg.norm(np.asarray(new.psi_hat) - psi))
        step_norms.append(step)
        logger.debug(f"[icc] j={j} step={step:.3e}")
        if step < best_norm:
            best, best_norm = new, step
        if step < tol:
            return new.model_copy(update={"iterations": j, "converged": True, "step_norms": step_norms})
        psi = np.asarray(new.psi_hat)

    logger.warning(f"ICC did not converge in {max_iter} iterations (smallest step {best_norm:.3e})")
    return best.model_copy(update={"iterations": max_iter, "converged": False, "step_norms": step_norms})
